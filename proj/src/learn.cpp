#include "uts/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "uts/error.hpp"
#include "uts/rng.hpp"

namespace uts {

namespace {

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;

    bool better_than(const SplitCandidate& other) const {
        if (decrease != other.decrease) return decrease > other.decrease;
        if (feature != other.feature) return feature < other.feature;
        return threshold < other.threshold;
    }
};

double gini_impurity(const std::vector<std::size_t>& counts, double total) {
    double sum_sq = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

class TreeBuilder {
  public:
    TreeBuilder(const Eigen::MatrixXd& features, const std::vector<int>& y_class,
                const std::vector<double>& y_value, ForestTask task,
                std::size_t class_count, const ForestParams& params,
                std::size_t features_per_split, std::mt19937_64& rng)
        : features_(features), y_class_(y_class), y_value_(y_value), task_(task),
          class_count_(class_count), params_(params),
          features_per_split_(features_per_split), rng_(rng) {}

    Tree build(const std::vector<std::size_t>& rows) {
        tree_.nodes.clear();
        grow(rows, 0);
        return std::move(tree_);
    }

  private:
    double node_impurity(const std::vector<std::size_t>& rows) const {
        if (task_ == ForestTask::Classify) {
            std::vector<std::size_t> counts(class_count_, 0);
            for (std::size_t r : rows) ++counts[static_cast<std::size_t>(y_class_[r])];
            return gini_impurity(counts, static_cast<double>(rows.size()));
        }
        double mean = 0.0;
        for (std::size_t r : rows) mean += y_value_[r];
        mean /= static_cast<double>(rows.size());
        double var = 0.0;
        for (std::size_t r : rows) var += (y_value_[r] - mean) * (y_value_[r] - mean);
        return var / static_cast<double>(rows.size());
    }

    double leaf_value(const std::vector<std::size_t>& rows) const {
        if (task_ == ForestTask::Classify) {
            std::vector<std::size_t> counts(class_count_, 0);
            for (std::size_t r : rows) ++counts[static_cast<std::size_t>(y_class_[r])];
            // Majority; ties go to the lower class index (lexicographically
            // smallest label, classes being sorted).
            std::size_t best = 0;
            for (std::size_t c = 1; c < counts.size(); ++c)
                if (counts[c] > counts[best]) best = c;
            return static_cast<double>(best);
        }
        double mean = 0.0;
        for (std::size_t r : rows) mean += y_value_[r];
        return mean / static_cast<double>(rows.size());
    }

    // Best threshold for one feature: midpoints between distinct consecutive
    // values, rows ordered by (value, row id) so the scan is content-stable.
    SplitCandidate best_split_for_feature(const std::vector<std::size_t>& rows,
                                          int feature, double impurity) const {
        std::vector<std::size_t> order = rows;
        std::sort(order.begin(), order.end(),
                  [this, feature](std::size_t a, std::size_t b) {
                      const double va = features_(static_cast<Eigen::Index>(a), feature);
                      const double vb = features_(static_cast<Eigen::Index>(b), feature);
                      if (va != vb) return va < vb;
                      return a < b;
                  });

        SplitCandidate best;
        best.feature = feature;
        const double total = static_cast<double>(rows.size());

        if (task_ == ForestTask::Classify) {
            std::vector<std::size_t> left_counts(class_count_, 0);
            std::vector<std::size_t> right_counts(class_count_, 0);
            for (std::size_t r : order)
                ++right_counts[static_cast<std::size_t>(y_class_[r])];
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const auto cls = static_cast<std::size_t>(y_class_[order[i]]);
                ++left_counts[cls];
                --right_counts[cls];
                const double va = features_(static_cast<Eigen::Index>(order[i]), feature);
                const double vb =
                    features_(static_cast<Eigen::Index>(order[i + 1]), feature);
                if (va == vb) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = total - nl;
                const double decrease =
                    impurity - (nl / total) * gini_impurity(left_counts, nl) -
                    (nr / total) * gini_impurity(right_counts, nr);
                SplitCandidate cand{feature, 0.5 * (va + vb), decrease};
                if (cand.better_than(best)) best = cand;
            }
        } else {
            double left_sum = 0.0, left_sq = 0.0;
            double right_sum = 0.0, right_sq = 0.0;
            for (std::size_t r : order) {
                right_sum += y_value_[r];
                right_sq += y_value_[r] * y_value_[r];
            }
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const double y = y_value_[order[i]];
                left_sum += y;
                left_sq += y * y;
                right_sum -= y;
                right_sq -= y * y;
                const double va = features_(static_cast<Eigen::Index>(order[i]), feature);
                const double vb =
                    features_(static_cast<Eigen::Index>(order[i + 1]), feature);
                if (va == vb) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = total - nl;
                const double var_l = left_sq / nl - (left_sum / nl) * (left_sum / nl);
                const double var_r =
                    right_sq / nr - (right_sum / nr) * (right_sum / nr);
                const double decrease =
                    impurity - (nl / total) * var_l - (nr / total) * var_r;
                SplitCandidate cand{feature, 0.5 * (va + vb), decrease};
                if (cand.better_than(best)) best = cand;
            }
        }
        return best;
    }

    int grow(const std::vector<std::size_t>& rows, int depth) {
        const int node_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        const double impurity = node_impurity(rows);
        const bool at_depth_limit = depth >= params_.max_depth;
        if (at_depth_limit || rows.size() < 2 || impurity <= 0.0) {
            tree_.nodes[static_cast<std::size_t>(node_id)].leaf_value =
                leaf_value(rows);
            return node_id;
        }

        // Feature subset for this split, drawn without replacement.
        const auto k = static_cast<std::size_t>(features_.cols());
        std::vector<int> pool(k);
        std::iota(pool.begin(), pool.end(), 0);
        for (std::size_t i = 0; i < features_per_split_; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(bounded(rng_, k - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<int> chosen(pool.begin(),
                                pool.begin() + static_cast<std::ptrdiff_t>(
                                                   features_per_split_));
        std::sort(chosen.begin(), chosen.end()); // tie rule: lower feature wins

        SplitCandidate best;
        for (int feature : chosen) {
            const SplitCandidate cand = best_split_for_feature(rows, feature, impurity);
            if (cand.decrease > 0.0 && (best.feature < 0 || cand.better_than(best)))
                best = cand;
        }
        if (best.feature < 0) {
            tree_.nodes[static_cast<std::size_t>(node_id)].leaf_value =
                leaf_value(rows);
            return node_id;
        }

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            if (features_(static_cast<Eigen::Index>(r), best.feature) <=
                best.threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }

        tree_.nodes[static_cast<std::size_t>(node_id)].feature = best.feature;
        tree_.nodes[static_cast<std::size_t>(node_id)].threshold = best.threshold;
        tree_.nodes[static_cast<std::size_t>(node_id)].impurity_decrease =
            best.decrease * static_cast<double>(rows.size());
        const int left = grow(left_rows, depth + 1);
        const int right = grow(right_rows, depth + 1);
        tree_.nodes[static_cast<std::size_t>(node_id)].left = left;
        tree_.nodes[static_cast<std::size_t>(node_id)].right = right;
        return node_id;
    }

    const Eigen::MatrixXd& features_;
    const std::vector<int>& y_class_;
    const std::vector<double>& y_value_;
    ForestTask task_;
    std::size_t class_count_;
    const ForestParams& params_;
    std::size_t features_per_split_;
    std::mt19937_64& rng_;
    Tree tree_;
};

double tree_predict(const Tree& tree, const Eigen::MatrixXd& features,
                    Eigen::Index row) {
    int node = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& n = tree.nodes[static_cast<std::size_t>(node)];
        node = features(row, n.feature) <= n.threshold ? n.left : n.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].leaf_value;
}

} // namespace

Forest fit_forest(const SupervisedTable& table, const ForestParams& params) {
    const std::size_t m = table.rows();
    if (m < 5) fail(ErrorKind::Degenerate, "fit_forest needs at least 5 rows");
    for (Eigen::Index i = 0; i < table.features.rows(); ++i)
        for (Eigen::Index j = 0; j < table.features.cols(); ++j)
            if (!std::isfinite(table.features(i, j)))
                fail(ErrorKind::Degenerate, "non-finite feature value");

    Forest forest;
    forest.task = table.task;
    forest.params = params;
    forest.feature_count = static_cast<std::size_t>(table.features.cols());

    std::vector<int> y_class(m, 0);
    std::vector<double> y_value(m, 0.0);
    if (table.task == ForestTask::Classify) {
        if (table.class_labels.size() != m)
            fail(ErrorKind::Schema, "label count does not match feature rows");
        std::set<std::string> unique(table.class_labels.begin(),
                                     table.class_labels.end());
        if (unique.size() < 2)
            fail(ErrorKind::Degenerate, "classification needs >= 2 classes");
        forest.classes.assign(unique.begin(), unique.end());
        std::map<std::string, int> index;
        for (std::size_t c = 0; c < forest.classes.size(); ++c)
            index[forest.classes[c]] = static_cast<int>(c);
        for (std::size_t r = 0; r < m; ++r) y_class[r] = index[table.class_labels[r]];
    } else {
        if (table.targets.size() != m)
            fail(ErrorKind::Schema, "target count does not match feature rows");
        y_value = table.targets;
        std::set<double> unique(y_value.begin(), y_value.end());
        if (unique.size() < 2)
            fail(ErrorKind::Degenerate, "regression needs >= 2 distinct targets");
    }

    std::size_t fps = params.features_per_split;
    if (fps == 0)
        fps = static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(forest.feature_count))));
    fps = std::min(fps, forest.feature_count);

    forest.trees.resize(params.n_trees);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        std::mt19937_64 rng(derive_seed(params.seed, t));
        std::vector<std::size_t> rows;
        rows.reserve(m);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < m; ++i)
                rows.push_back(static_cast<std::size_t>(bounded(rng, m)));
            std::sort(rows.begin(), rows.end());
        } else {
            rows.resize(m);
            std::iota(rows.begin(), rows.end(), 0);
        }
        TreeBuilder builder(table.features, y_class, y_value, table.task,
                            forest.classes.size(), params, fps, rng);
        forest.trees[t] = builder.build(rows);
    }
    return forest;
}

std::vector<std::string> predict_classes(const Forest& model,
                                         const Eigen::MatrixXd& features) {
    if (model.task != ForestTask::Classify)
        fail(ErrorKind::Schema, "model is not a classifier");
    if (static_cast<std::size_t>(features.cols()) != model.feature_count)
        fail(ErrorKind::Schema, "feature width " + std::to_string(features.cols()) +
                                    " does not match training width " +
                                    std::to_string(model.feature_count));
    std::vector<std::string> out(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        std::vector<std::size_t> votes(model.classes.size(), 0);
        for (const auto& tree : model.trees)
            ++votes[static_cast<std::size_t>(tree_predict(tree, features, i))];
        std::size_t best = 0; // ties resolve to the lexicographically smallest
        for (std::size_t c = 1; c < votes.size(); ++c)
            if (votes[c] > votes[best]) best = c;
        out[static_cast<std::size_t>(i)] = model.classes[best];
    }
    return out;
}

std::vector<double> predict_values(const Forest& model,
                                   const Eigen::MatrixXd& features) {
    if (model.task != ForestTask::Regress)
        fail(ErrorKind::Schema, "model is not a regressor");
    if (static_cast<std::size_t>(features.cols()) != model.feature_count)
        fail(ErrorKind::Schema, "feature width does not match training width");
    std::vector<double> out(static_cast<std::size_t>(features.rows()), 0.0);
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        double sum = 0.0;
        for (const auto& tree : model.trees) sum += tree_predict(tree, features, i);
        out[static_cast<std::size_t>(i)] =
            sum / static_cast<double>(model.trees.size());
    }
    return out;
}

std::vector<GroupFold> group_kfold(const SupervisedTable& table, std::size_t folds) {
    if (folds < 2) fail(ErrorKind::Grouping, "group_kfold needs >= 2 folds");
    std::map<std::string, std::vector<std::size_t>> by_group;
    for (std::size_t r = 0; r < table.rows(); ++r) by_group[table.groups[r]].push_back(r);
    if (by_group.size() < folds)
        fail(ErrorKind::Grouping, "only " + std::to_string(by_group.size()) +
                                      " groups for " + std::to_string(folds) +
                                      " folds");

    // Greedy: largest groups first, each into the currently smallest fold.
    std::vector<std::pair<std::string, std::size_t>> sized;
    for (const auto& [group, rows] : by_group) sized.emplace_back(group, rows.size());
    std::sort(sized.begin(), sized.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<std::vector<std::string>> fold_groups(folds);
    std::vector<std::size_t> fold_rows(folds, 0);
    for (const auto& [group, size] : sized) {
        std::size_t target = 0;
        for (std::size_t f = 1; f < folds; ++f)
            if (fold_rows[f] < fold_rows[target]) target = f;
        fold_groups[target].push_back(group);
        fold_rows[target] += size;
    }

    std::vector<GroupFold> out(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        out[f].test_groups = fold_groups[f];
        std::set<std::string> test_set(fold_groups[f].begin(), fold_groups[f].end());
        for (std::size_t r = 0; r < table.rows(); ++r) {
            if (test_set.count(table.groups[r]))
                out[f].test_rows.push_back(r);
            else
                out[f].train_rows.push_back(r);
        }
    }
    return out;
}

double balanced_accuracy(const std::vector<std::string>& truth,
                         const std::vector<std::string>& pred) {
    if (truth.size() != pred.size() || truth.empty())
        fail(ErrorKind::Schema, "truth and prediction lengths differ");
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_class; // hit, total
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto& [hits, total] = per_class[truth[i]];
        ++total;
        if (truth[i] == pred[i]) ++hits;
    }
    double recall_sum = 0.0;
    for (const auto& [cls, stats] : per_class) {
        if (stats.second == 0)
            fail(ErrorKind::Degenerate, "empty class '" + cls + "'");
        recall_sum += static_cast<double>(stats.first) /
                      static_cast<double>(stats.second);
    }
    return recall_sum / static_cast<double>(per_class.size());
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&values](std::size_t a, std::size_t b) {
        return values[a] < values[b];
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

RegressionScores regression_scores(const std::vector<double>& truth,
                                   const std::vector<double>& pred) {
    if (truth.size() != pred.size() || truth.size() < 3)
        fail(ErrorKind::Schema, "regression scores need matched length >= 3");
    const double mean =
        std::accumulate(truth.begin(), truth.end(), 0.0) / truth.size();
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
        ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    }
    if (ss_tot == 0.0)
        fail(ErrorKind::Degenerate, "constant truth makes R2 undefined");

    RegressionScores scores;
    scores.r2 = 1.0 - ss_res / ss_tot;
    scores.spearman = pearson(average_ranks(truth), average_ranks(pred));
    return scores;
}

std::vector<double> feature_importance(const Forest& model) {
    std::vector<double> importance(model.feature_count, 0.0);
    for (const auto& tree : model.trees)
        for (const auto& node : tree.nodes)
            if (node.feature >= 0)
                importance[static_cast<std::size_t>(node.feature)] +=
                    node.impurity_decrease;
    const double total =
        std::accumulate(importance.begin(), importance.end(), 0.0);
    if (total > 0.0)
        for (double& v : importance) v /= total;
    return importance;
}

std::string forest_to_json(const Forest& model) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["task"] = model.task == ForestTask::Classify ? "classify" : "regress";
    j["classes"] = model.classes;
    j["feature_count"] = model.feature_count;
    j["params"] = {{"max_depth", model.params.max_depth},
                   {"n_trees", model.params.n_trees},
                   {"bootstrap", model.params.bootstrap},
                   {"seed", model.params.seed},
                   {"features_per_split", model.params.features_per_split}};
    nlohmann::ordered_json trees = nlohmann::ordered_json::array();
    for (const auto& tree : model.trees) {
        nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
        for (const auto& n : tree.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_value,
                             n.impurity_decrease});
        trees.push_back(nodes);
    }
    j["trees"] = trees;
    return j.dump();
}

Forest forest_from_json(const std::string& json_text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        fail(ErrorKind::Parse, std::string("invalid forest json: ") + e.what());
    }
    Forest model;
    try {
        if (j.at("version").get<int>() != 1)
            fail(ErrorKind::Parse, "unsupported forest version");
        model.task = j.at("task").get<std::string>() == "classify"
                         ? ForestTask::Classify
                         : ForestTask::Regress;
        model.classes = j.at("classes").get<std::vector<std::string>>();
        model.feature_count = j.at("feature_count").get<std::size_t>();
        const auto& p = j.at("params");
        model.params.max_depth = p.at("max_depth").get<int>();
        model.params.n_trees = p.at("n_trees").get<std::size_t>();
        model.params.bootstrap = p.at("bootstrap").get<bool>();
        model.params.seed = p.at("seed").get<std::uint64_t>();
        model.params.features_per_split =
            p.at("features_per_split").get<std::size_t>();
        for (const auto& tree_json : j.at("trees")) {
            Tree tree;
            for (const auto& n : tree_json) {
                TreeNode node;
                node.feature = n.at(0).get<int>();
                node.threshold = n.at(1).get<double>();
                node.left = n.at(2).get<int>();
                node.right = n.at(3).get<int>();
                node.leaf_value = n.at(4).get<double>();
                node.impurity_decrease = n.at(5).get<double>();
                tree.nodes.push_back(node);
            }
            model.trees.push_back(std::move(tree));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("forest json schema: ") + e.what());
    }
    return model;
}

} // namespace uts
