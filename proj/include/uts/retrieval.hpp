#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uts/point_cloud.hpp"

namespace uts {

struct ScoredDoc {
    std::size_t doc = 0;
    double score = 0.0;
};

/// Per-query ranked lists truncated at cutoff c.
struct RankedRun {
    std::vector<std::string> query_ids;
    std::vector<std::vector<ScoredDoc>> rankings; // parallel to query_ids
    std::size_t cutoff = 0;
};

/// (query id, doc id) -> graded relevance.
struct Qrels {
    std::map<std::string, std::map<std::size_t, int>> grades;
};

struct RetrievabilityTable {
    std::vector<std::size_t> counts; // r(d) per doc index
    std::size_t query_count = 0;
    std::size_t cutoff = 0;
};

// Exact top-c by inner product per query (unit-normalized inputs); ties break
// toward the lower doc index.
RankedRun dense_retrieve(const PointCloud& queries, const PointCloud& docs,
                         std::size_t c);

// r(d) = number of queries whose top-c list contains d (binary weighting).
RetrievabilityTable retrievability(const RankedRun& run, std::size_t doc_count);

// Gini coefficient over all documents including zero-count ones.
double gini(const RetrievabilityTable& table);

struct ExtremeDocs {
    std::vector<std::size_t> top;    // m most retrieved, descending r
    std::vector<std::size_t> bottom; // m least retrieved, ascending r
};

ExtremeDocs select_extremes(const RetrievabilityTable& table, std::size_t m);

struct MetricTable {
    std::vector<std::size_t> cutoffs;
    std::vector<std::string> query_ids;
    // metric -> cutoff index -> per-query values (parallel to query_ids)
    std::map<std::string, std::vector<std::vector<double>>> per_query;
    std::map<std::string, std::vector<double>> mean;
    std::vector<std::string> skipped_queries; // no relevant docs in qrels
};

// Recall@k, MAP@k (denominator min(k, R)), NDCG@k (gain 2^grade - 1, log2
// discount) per query and mean.
MetricTable eval_metrics(const RankedRun& run, const Qrels& qrels,
                         const std::vector<std::size_t>& cutoffs);

// Per-group z-normalization (population sd); constant groups map to zeros.
std::map<std::string, std::vector<double>> znormalize_by_group(
    const std::map<std::string, std::vector<double>>& values);

// --- TREC formats ------------------------------------------------------------

void save_run_trec(const RankedRun& run, const std::string& path,
                   const std::string& tag = "uts");
RankedRun load_run_trec(const std::string& path);
Qrels load_qrels_trec(const std::string& path);

namespace detail {
// Serial reference for the OpenMP per-query scoring loop.
RankedRun dense_retrieve_serial(const PointCloud& queries, const PointCloud& docs,
                                std::size_t c);
} // namespace detail

} // namespace uts
