#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace uts {

enum class ForestTask { Classify, Regress };

/// Feature rows with class labels or real targets and a group id per row.
struct SupervisedTable {
    Eigen::MatrixXd features;              // m x K
    std::vector<std::string> class_labels; // classification targets
    std::vector<double> targets;           // regression targets
    std::vector<std::string> groups;       // group (dataset) per row
    ForestTask task = ForestTask::Classify;

    std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
};

struct ForestParams {
    int max_depth = 5;
    std::size_t n_trees = 200;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    // features per split defaults to ceil(sqrt(K)) when 0
    std::size_t features_per_split = 0;
};

struct TreeNode {
    int feature = -1;         // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;  // class index or mean target
    double impurity_decrease = 0.0; // weighted, for importance
};

struct Tree {
    std::vector<TreeNode> nodes; // node 0 is the root
};

struct Forest {
    std::vector<Tree> trees;
    ForestTask task = ForestTask::Classify;
    ForestParams params;
    std::vector<std::string> classes; // sorted; leaf_value indexes this
    std::size_t feature_count = 0;
};

Forest fit_forest(const SupervisedTable& table, const ForestParams& params);

std::vector<std::string> predict_classes(const Forest& model,
                                         const Eigen::MatrixXd& features);
std::vector<double> predict_values(const Forest& model,
                                   const Eigen::MatrixXd& features);

struct GroupFold {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    std::vector<std::string> test_groups;
};

// Groups assigned greedily by descending size into balanced folds; no group
// spans train and test.
std::vector<GroupFold> group_kfold(const SupervisedTable& table, std::size_t folds);

double balanced_accuracy(const std::vector<std::string>& truth,
                         const std::vector<std::string>& pred);

struct RegressionScores {
    double r2 = 0.0;
    double spearman = 0.0;
};

RegressionScores regression_scores(const std::vector<double>& truth,
                                   const std::vector<double>& pred);

// Mean impurity decrease per feature across trees, normalized to sum 1.
std::vector<double> feature_importance(const Forest& model);

std::string forest_to_json(const Forest& model);
Forest forest_from_json(const std::string& json_text);

} // namespace uts
