#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "uts/learn.hpp"
#include "uts/signature.hpp"

namespace uts {

/// One cross-validation fold with everything fitted on its training rows.
struct CvFoldReport {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    std::vector<std::string> test_groups;
    NormalizationState norm; // fitted on train rows only
    double score = 0.0;      // balanced accuracy (classify) or R2 (regress)
    double spearman = 0.0;   // regression only
    std::vector<double> importance;
};

struct CvReport {
    ForestTask task = ForestTask::Classify;
    std::vector<CvFoldReport> folds;
    double mean_score = 0.0;
    double sd_score = 0.0;
    std::vector<std::string> feature_names; // post-normalization schema
    std::vector<double> mean_importance;
};

// Grouped cross-validation over signature rows: per fold, max-abs
// normalization and the forest are fitted on training rows only, then applied
// to the held-out groups. Signatures must share a schema; `groups` assigns a
// dataset to every row and no group spans train and test.
CvReport grouped_cv(const std::vector<SignatureVector>& signatures,
                    const std::vector<std::string>& class_labels,
                    const std::vector<double>& targets,
                    const std::vector<std::string>& groups, ForestTask task,
                    std::size_t folds, const ForestParams& params);

} // namespace uts
