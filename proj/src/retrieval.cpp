#include "uts/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "uts/error.hpp"

namespace uts {

namespace {

RankedRun retrieve_impl(const PointCloud& queries, const PointCloud& docs,
                        std::size_t c, bool parallel) {
    const Eigen::Index nq = queries.rows();
    const Eigen::Index nd = docs.rows();
    if (c < 1 || c > static_cast<std::size_t>(nd))
        fail(ErrorKind::Bounds, "cutoff c=" + std::to_string(c) +
                                    " exceeds corpus size " + std::to_string(nd));
    if (queries.dim() != docs.dim())
        fail(ErrorKind::Schema, "query and doc dimensions differ");

    RankedRun run;
    run.cutoff = c;
    run.query_ids.resize(static_cast<std::size_t>(nq));
    run.rankings.resize(static_cast<std::size_t>(nq));

    // Per-query scoring is independent; output order is fixed by query index.
#pragma omp parallel for schedule(static) if (parallel)
    for (Eigen::Index q = 0; q < nq; ++q) {
        std::vector<ScoredDoc> scored(static_cast<std::size_t>(nd));
        for (Eigen::Index d = 0; d < nd; ++d)
            scored[static_cast<std::size_t>(d)] = {
                static_cast<std::size_t>(d),
                queries.data.row(q).dot(docs.data.row(d))};
        // Descending score; ties toward the lower doc index.
        std::partial_sort(scored.begin(),
                          scored.begin() + static_cast<std::ptrdiff_t>(c),
                          scored.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
                              if (a.score != b.score) return a.score > b.score;
                              return a.doc < b.doc;
                          });
        scored.resize(c);
        run.rankings[static_cast<std::size_t>(q)] = std::move(scored);
        run.query_ids[static_cast<std::size_t>(q)] = "q" + std::to_string(q);
    }
    return run;
}

} // namespace

RankedRun dense_retrieve(const PointCloud& queries, const PointCloud& docs,
                         std::size_t c) {
    return retrieve_impl(queries, docs, c, true);
}

RankedRun detail::dense_retrieve_serial(const PointCloud& queries,
                                        const PointCloud& docs, std::size_t c) {
    return retrieve_impl(queries, docs, c, false);
}

RetrievabilityTable retrievability(const RankedRun& run, std::size_t doc_count) {
    RetrievabilityTable table;
    table.query_count = run.query_ids.size();
    table.cutoff = run.cutoff;
    table.counts.assign(doc_count, 0);
    for (const auto& ranking : run.rankings) {
        for (const auto& entry : ranking) {
            if (entry.doc >= doc_count)
                fail(ErrorKind::Schema, "run references doc " +
                                            std::to_string(entry.doc) +
                                            " beyond corpus size " +
                                            std::to_string(doc_count));
            ++table.counts[entry.doc];
        }
    }
    return table;
}

double gini(const RetrievabilityTable& table) {
    const std::size_t n = table.counts.size();
    if (n == 0) fail(ErrorKind::Degenerate, "empty retrievability table");
    double total = 0.0;
    for (std::size_t c : table.counts) total += static_cast<double>(c);
    if (total == 0.0)
        fail(ErrorKind::Degenerate, "all-zero retrievability table");

    // Equivalent sorted form of sum_ij |r_i - r_j| / (2 n^2 rbar).
    std::vector<double> sorted(table.counts.begin(), table.counts.end());
    std::sort(sorted.begin(), sorted.end());
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        weighted += static_cast<double>(2 * (i + 1)) * sorted[i];
    const double nn = static_cast<double>(n);
    return (weighted - (nn + 1.0) * total) / (nn * total);
}

ExtremeDocs select_extremes(const RetrievabilityTable& table, std::size_t m) {
    const std::size_t n = table.counts.size();
    if (m < 1 || 2 * m > n)
        fail(ErrorKind::Bounds, "select_extremes needs 2m <= docs, got m=" +
                                    std::to_string(m) + " with " +
                                    std::to_string(n) + " docs");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Descending count, ties toward the lower doc index.
    std::sort(order.begin(), order.end(), [&table](std::size_t a, std::size_t b) {
        if (table.counts[a] != table.counts[b])
            return table.counts[a] > table.counts[b];
        return a < b;
    });

    ExtremeDocs extremes;
    extremes.top.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    // Bottom m by ascending r with the same index tie rule, drawn from the
    // docs not already taken by the top set so the selections stay disjoint.
    std::vector<std::size_t> ascending(order.begin() + static_cast<std::ptrdiff_t>(m),
                                       order.end());
    std::sort(ascending.begin(), ascending.end(),
              [&table](std::size_t a, std::size_t b) {
                  if (table.counts[a] != table.counts[b])
                      return table.counts[a] < table.counts[b];
                  return a < b;
              });
    extremes.bottom.assign(ascending.begin(),
                           ascending.begin() + static_cast<std::ptrdiff_t>(m));
    return extremes;
}

MetricTable eval_metrics(const RankedRun& run, const Qrels& qrels,
                         const std::vector<std::size_t>& cutoffs) {
    MetricTable table;
    table.cutoffs = cutoffs;
    for (const std::string metric : {"recall", "map", "ndcg"})
        table.per_query[metric].resize(cutoffs.size());

    for (std::size_t q = 0; q < run.query_ids.size(); ++q) {
        const std::string& qid = run.query_ids[q];
        const auto it = qrels.grades.find(qid);
        std::vector<std::pair<std::size_t, int>> relevant;
        if (it != qrels.grades.end())
            for (const auto& [doc, grade] : it->second)
                if (grade > 0) relevant.emplace_back(doc, grade);
        if (relevant.empty()) {
            table.skipped_queries.push_back(qid);
            continue;
        }
        table.query_ids.push_back(qid);

        const auto& ranking = run.rankings[q];
        const double total_relevant = static_cast<double>(relevant.size());
        auto grade_of = [&it](std::size_t doc) {
            const auto g = it->second.find(doc);
            return g == it->second.end() ? 0 : std::max(0, g->second);
        };

        for (std::size_t ci = 0; ci < cutoffs.size(); ++ci) {
            const std::size_t k = cutoffs[ci];
            const std::size_t depth = std::min(k, ranking.size());

            std::size_t hits = 0;
            double precision_sum = 0.0;
            double dcg = 0.0;
            for (std::size_t rank = 0; rank < depth; ++rank) {
                const int grade = grade_of(ranking[rank].doc);
                if (grade > 0) {
                    ++hits;
                    precision_sum += static_cast<double>(hits) /
                                     static_cast<double>(rank + 1);
                }
                dcg += (std::pow(2.0, grade) - 1.0) /
                       std::log2(static_cast<double>(rank) + 2.0);
            }

            // Ideal DCG from the grade multiset, best grades first.
            std::vector<int> ideal;
            ideal.reserve(relevant.size());
            for (const auto& [doc, grade] : relevant) ideal.push_back(grade);
            std::sort(ideal.begin(), ideal.end(), std::greater<int>());
            double idcg = 0.0;
            for (std::size_t rank = 0; rank < std::min<std::size_t>(k, ideal.size());
                 ++rank)
                idcg += (std::pow(2.0, ideal[rank]) - 1.0) /
                        std::log2(static_cast<double>(rank) + 2.0);

            table.per_query["recall"][ci].push_back(
                static_cast<double>(hits) / total_relevant);
            table.per_query["map"][ci].push_back(
                precision_sum / std::min(static_cast<double>(k), total_relevant));
            table.per_query["ndcg"][ci].push_back(idcg > 0.0 ? dcg / idcg : 0.0);
        }
    }

    if (table.query_ids.empty())
        fail(ErrorKind::Degenerate, "no run query has relevant documents in qrels");

    for (auto& [metric, per_cutoff] : table.per_query) {
        auto& means = table.mean[metric];
        means.resize(per_cutoff.size());
        for (std::size_t ci = 0; ci < per_cutoff.size(); ++ci)
            means[ci] = std::accumulate(per_cutoff[ci].begin(),
                                        per_cutoff[ci].end(), 0.0) /
                        static_cast<double>(per_cutoff[ci].size());
    }
    return table;
}

std::map<std::string, std::vector<double>> znormalize_by_group(
    const std::map<std::string, std::vector<double>>& values) {
    std::map<std::string, std::vector<double>> out;
    for (const auto& [group, xs] : values) {
        if (xs.size() < 2)
            fail(ErrorKind::Grouping,
                 "group '" + group + "' has fewer than 2 values");
        const double mean =
            std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(xs.size());
        const double sd = std::sqrt(var);
        std::vector<double> z(xs.size(), 0.0);
        if (sd > 0.0)
            for (std::size_t i = 0; i < xs.size(); ++i) z[i] = (xs[i] - mean) / sd;
        out[group] = std::move(z);
    }
    return out;
}

// --- TREC formats ------------------------------------------------------------

void save_run_trec(const RankedRun& run, const std::string& path,
                   const std::string& tag) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Parse, "cannot write '" + path + "'");
    out.precision(17);
    for (std::size_t q = 0; q < run.query_ids.size(); ++q) {
        std::size_t rank = 1;
        for (const auto& entry : run.rankings[q])
            out << run.query_ids[q] << " Q0 d" << entry.doc << ' ' << rank++
                << ' ' << entry.score << ' ' << tag << '\n';
    }
}

namespace {

std::size_t parse_doc_id(const std::string& token, const std::string& path,
                         std::size_t lineno) {
    // Doc ids are written as d<index>; bare integers are also accepted.
    const std::string digits = token.rfind('d', 0) == 0 ? token.substr(1) : token;
    try {
        return std::stoull(digits);
    } catch (const std::exception&) {
        fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                   ": bad doc id '" + token + "'");
    }
}

} // namespace

RankedRun load_run_trec(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");

    RankedRun run;
    std::map<std::string, std::size_t> query_index;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string qid, q0, doc_token, rank_s, score_s, tag;
        if (!(row >> qid >> q0 >> doc_token >> rank_s >> score_s >> tag))
            fail(ErrorKind::Parse,
                 path + ":" + std::to_string(lineno) + ": expected 6 fields");
        const std::size_t doc = parse_doc_id(doc_token, path, lineno);
        const double score = std::stod(score_s);

        auto [it, inserted] = query_index.try_emplace(qid, run.query_ids.size());
        if (inserted) {
            run.query_ids.push_back(qid);
            run.rankings.emplace_back();
        }
        auto& ranking = run.rankings[it->second];
        if (!ranking.empty() && score > ranking.back().score)
            fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                       ": scores must be non-increasing per query");
        for (const auto& seen : ranking)
            if (seen.doc == doc)
                fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                           ": duplicate doc in query '" + qid + "'");
        ranking.push_back({doc, score});
    }
    for (const auto& ranking : run.rankings)
        run.cutoff = std::max(run.cutoff, ranking.size());
    return run;
}

Qrels load_qrels_trec(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string qid, zero, doc_token;
        int grade;
        if (!(row >> qid >> zero >> doc_token >> grade))
            fail(ErrorKind::Parse,
                 path + ":" + std::to_string(lineno) + ": expected 4 fields");
        if (grade < 0)
            fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                       ": negative relevance grade");
        qrels.grades[qid][parse_doc_id(doc_token, path, lineno)] = grade;
    }
    return qrels;
}

} // namespace uts
