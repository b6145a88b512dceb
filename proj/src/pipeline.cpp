#include "uts/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "uts/error.hpp"

namespace uts {

CvReport grouped_cv(const std::vector<SignatureVector>& signatures,
                    const std::vector<std::string>& class_labels,
                    const std::vector<double>& targets,
                    const std::vector<std::string>& groups, ForestTask task,
                    std::size_t folds, const ForestParams& params) {
    const std::size_t m = signatures.size();
    if (m == 0) fail(ErrorKind::Degenerate, "no signatures for cross-validation");
    if (groups.size() != m)
        fail(ErrorKind::Schema, "group count does not match signature count");
    if (task == ForestTask::Classify && class_labels.size() != m)
        fail(ErrorKind::Schema, "label count does not match signature count");
    if (task == ForestTask::Regress && targets.size() != m)
        fail(ErrorKind::Schema, "target count does not match signature count");
    for (std::size_t i = 1; i < m; ++i)
        if (!signatures[i].same_schema(signatures[0]))
            fail(ErrorKind::Schema, "signatures do not share a schema");

    SupervisedTable fold_table; // only groups matter for the fold split
    fold_table.features.resize(static_cast<Eigen::Index>(m), 1);
    fold_table.features.setZero();
    fold_table.groups = groups;
    const std::vector<GroupFold> split = group_kfold(fold_table, folds);

    CvReport report;
    report.task = task;

    for (const GroupFold& fold : split) {
        CvFoldReport fr;
        fr.train_rows = fold.train_rows;
        fr.test_rows = fold.test_rows;
        fr.test_groups = fold.test_groups;

        // Normalization fitted strictly on training rows.
        std::vector<SignatureVector> train_sigs;
        train_sigs.reserve(fold.train_rows.size());
        for (std::size_t r : fold.train_rows) train_sigs.push_back(signatures[r]);
        fr.norm = fit_normalization(train_sigs);

        auto features_of = [&](const std::vector<std::size_t>& rows) {
            std::vector<SignatureVector> applied;
            applied.reserve(rows.size());
            for (std::size_t r : rows)
                applied.push_back(apply_normalization(signatures[r], fr.norm));
            Eigen::MatrixXd mat(static_cast<Eigen::Index>(rows.size()),
                                static_cast<Eigen::Index>(applied[0].values.size()));
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < applied[i].values.size(); ++j)
                    mat(static_cast<Eigen::Index>(i),
                        static_cast<Eigen::Index>(j)) = applied[i].values[j];
            if (report.feature_names.empty())
                report.feature_names = applied[0].names;
            return mat;
        };

        SupervisedTable train;
        train.task = task;
        train.features = features_of(fold.train_rows);
        train.groups.reserve(fold.train_rows.size());
        for (std::size_t r : fold.train_rows) train.groups.push_back(groups[r]);
        if (task == ForestTask::Classify)
            for (std::size_t r : fold.train_rows)
                train.class_labels.push_back(class_labels[r]);
        else
            for (std::size_t r : fold.train_rows) train.targets.push_back(targets[r]);

        const Forest model = fit_forest(train, params);
        const Eigen::MatrixXd test_features = features_of(fold.test_rows);

        if (task == ForestTask::Classify) {
            std::vector<std::string> truth;
            truth.reserve(fold.test_rows.size());
            for (std::size_t r : fold.test_rows) truth.push_back(class_labels[r]);
            fr.score = balanced_accuracy(truth, predict_classes(model, test_features));
        } else {
            std::vector<double> truth;
            truth.reserve(fold.test_rows.size());
            for (std::size_t r : fold.test_rows) truth.push_back(targets[r]);
            const RegressionScores s =
                regression_scores(truth, predict_values(model, test_features));
            fr.score = s.r2;
            fr.spearman = s.spearman;
        }
        fr.importance = feature_importance(model);
        report.folds.push_back(std::move(fr));
    }

    double sum = 0.0;
    for (const auto& fr : report.folds) sum += fr.score;
    report.mean_score = sum / static_cast<double>(report.folds.size());
    double var = 0.0;
    for (const auto& fr : report.folds)
        var += (fr.score - report.mean_score) * (fr.score - report.mean_score);
    report.sd_score = std::sqrt(var / static_cast<double>(report.folds.size()));

    // Importance vectors can differ in length across folds when different
    // components go constant; align on the shortest common prefix is wrong,
    // so average only folds matching the reported schema width.
    if (!report.feature_names.empty()) {
        const std::size_t width = report.feature_names.size();
        report.mean_importance.assign(width, 0.0);
        std::size_t used = 0;
        for (const auto& fr : report.folds) {
            if (fr.importance.size() != width) continue;
            for (std::size_t j = 0; j < width; ++j)
                report.mean_importance[j] += fr.importance[j];
            ++used;
        }
        if (used > 0)
            for (double& v : report.mean_importance)
                v /= static_cast<double>(used);
    }
    return report;
}

} // namespace uts
