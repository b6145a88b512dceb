// uts: batch CLI for embedding-space signature analysis.
//
// Verbs: signature, local-signature, compare, retrieve, retrievability, eval,
// predict, sweep, correlations, normalize, reduce. Exit codes: 0 success,
// 2 input/schema error, 3 numerical/degenerate error. Primary outputs are
// byte-identical across reruns; timestamps live in run_meta.json only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uts/clustering.hpp"
#include "uts/dimension.hpp"
#include "uts/diversity.hpp"
#include "uts/error.hpp"
#include "uts/homology.hpp"
#include "uts/learn.hpp"
#include "uts/pipeline.hpp"
#include "uts/point_cloud.hpp"
#include "uts/retrieval.hpp"
#include "uts/rng.hpp"
#include "uts/signature.hpp"

namespace fs = std::filesystem;
using uts::Error;
using uts::ErrorKind;

namespace {

struct Shared {
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    std::string metric = "euclidean";
    bool desk_scale = false;
    std::string out = ".";
};

void add_shared(CLI::App* cmd, Shared& shared) {
    cmd->add_option("--seed", shared.seeds, "seed list")->delimiter(',');
    cmd->add_option("--metric", shared.metric, "euclidean or cosine")
        ->check(CLI::IsMember({"euclidean", "cosine"}));
    cmd->add_flag("--desk-scale", shared.desk_scale,
                  "use reduced per-descriptor sample budgets");
    cmd->add_option("--out", shared.out, "output directory");
    // Let --config (and other unmatched flags) reach the top-level app so a
    // config file with a [command] section can supply defaults.
    cmd->fallthrough();
}

uts::DescriptorConfig descriptor_config(const Shared& shared) {
    return shared.desk_scale ? uts::DescriptorConfig::desk_scale()
                             : uts::DescriptorConfig::full_scale();
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) uts::fail(ErrorKind::Parse, "cannot create output directory " + out);
}

// Atomic write: the payload lands under its final name only when complete.
void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) uts::fail(ErrorKind::Parse, "cannot write " + tmp.string());
        f << content;
    }
    fs::rename(tmp, path);
}

// Timestamps and host facts are confined here so payloads stay reproducible.
void write_run_meta(const std::string& out, const std::string& command,
                    const uts::DescriptorConfig& config) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::ostringstream stamp;
    stamp << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
    nlohmann::ordered_json meta;
    meta["command"] = command;
    meta["config_hash"] = config.hash();
    meta["timestamp"] = stamp.str();
    write_atomic(fs::path(out) / "run_meta.json", meta.dump(2) + "\n");
}

uts::PointCloud load_cloud(const std::string& path) {
    return uts::load_embeddings(path, uts::detect_format(path));
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<uts::SignatureVector> load_signature_files(
    const std::vector<std::string>& paths) {
    std::vector<uts::SignatureVector> set;
    for (const auto& p : paths) {
        auto part = uts::load_signatures_jsonl(p);
        set.insert(set.end(), part.begin(), part.end());
    }
    if (set.empty()) uts::fail(ErrorKind::Degenerate, "no signatures loaded");
    return set;
}

std::string csv_num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// --- verbs -------------------------------------------------------------------

int cmd_signature(const std::vector<std::string>& inputs, const Shared& shared,
                  const std::string& dataset) {
    ensure_out_dir(shared.out);
    const uts::DescriptorConfig config = descriptor_config(shared);
    std::vector<uts::SignatureVector> set;
    for (const auto& input : inputs) {
        const uts::PointCloud cloud = uts::normalize_rows(load_cloud(input));
        for (std::uint64_t seed : shared.seeds) {
            uts::SignatureVector sig = uts::compute_global_signature(cloud, config, seed);
            sig.source.model = stem_of(input);
            sig.source.dataset = dataset.empty() ? stem_of(input) : dataset;
            set.push_back(std::move(sig));
        }
    }
    std::ostringstream payload;
    for (const auto& sig : set) payload << uts::signature_to_json(sig) << "\n";
    write_atomic(fs::path(shared.out) / "signatures.jsonl", payload.str());
    write_run_meta(shared.out, "signature", config);
    return 0;
}

int cmd_local_signature(const std::string& input, const Shared& shared,
                        std::size_t anchor, std::size_t k) {
    ensure_out_dir(shared.out);
    const uts::DescriptorConfig config = descriptor_config(shared);
    const uts::PointCloud cloud = uts::normalize_rows(load_cloud(input));
    uts::SignatureVector sig = uts::compute_local_signature(cloud, anchor, k, config);
    sig.source.model = stem_of(input);
    sig.source.dataset = "anchor-" + std::to_string(anchor);
    write_atomic(fs::path(shared.out) / "local_signature.jsonl",
                 uts::signature_to_json(sig) + "\n");
    write_run_meta(shared.out, "local-signature", config);
    return 0;
}

int cmd_compare(const std::vector<std::string>& files, const Shared& shared) {
    ensure_out_dir(shared.out);
    auto set = load_signature_files(files);
    if (set.size() < 2)
        uts::fail(ErrorKind::Schema, "compare needs at least 2 signatures");

    std::sort(set.begin(), set.end(), [](const auto& a, const auto& b) {
        if (a.source.model != b.source.model) return a.source.model < b.source.model;
        if (a.source.dataset != b.source.dataset)
            return a.source.dataset < b.source.dataset;
        return a.seed < b.seed;
    });

    const uts::NormalizationState norm = uts::fit_normalization(set);
    std::vector<uts::SignatureVector> normed;
    normed.reserve(set.size());
    for (const auto& sig : set) normed.push_back(uts::apply_normalization(sig, norm));

    // Distances between models, averaged over shared (dataset, seed) slots.
    std::vector<std::string> models;
    for (const auto& sig : set)
        if (models.empty() || models.back() != sig.source.model)
            models.push_back(sig.source.model);
    models.erase(std::unique(models.begin(), models.end()), models.end());
    const std::size_t m = models.size();
    if (m < 2) uts::fail(ErrorKind::Schema, "compare needs at least 2 models");

    auto model_index = [&models](const std::string& name) {
        return static_cast<std::size_t>(
            std::find(models.begin(), models.end(), name) - models.begin());
    };

    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                                 static_cast<Eigen::Index>(m));
    Eigen::MatrixXd counts = dist;
    for (std::size_t a = 0; a < normed.size(); ++a) {
        for (std::size_t b = a + 1; b < normed.size(); ++b) {
            const auto& sa = set[a].source;
            const auto& sb = set[b].source;
            if (sa.model == sb.model) continue;
            if (sa.dataset != sb.dataset || set[a].seed != set[b].seed) continue;
            const double d = uts::signature_distance(normed[a], normed[b]);
            const auto i = static_cast<Eigen::Index>(model_index(sa.model));
            const auto j = static_cast<Eigen::Index>(model_index(sb.model));
            dist(i, j) += d;
            dist(j, i) += d;
            counts(i, j) += 1.0;
            counts(j, i) += 1.0;
        }
    }
    for (Eigen::Index i = 0; i < dist.rows(); ++i)
        for (Eigen::Index j = 0; j < dist.cols(); ++j)
            if (counts(i, j) > 0.0) dist(i, j) /= counts(i, j);
    if (m > 1 && counts.sum() == 0.0)
        uts::fail(ErrorKind::Schema,
                  "no comparable (dataset, seed) pairs between models");

    std::ostringstream dcsv;
    dcsv << "model";
    for (const auto& name : models) dcsv << "," << name;
    dcsv << "\n";
    for (std::size_t i = 0; i < m; ++i) {
        dcsv << models[i];
        for (std::size_t j = 0; j < m; ++j)
            dcsv << "," << csv_num(dist(static_cast<Eigen::Index>(i),
                                        static_cast<Eigen::Index>(j)));
        dcsv << "\n";
    }
    write_atomic(fs::path(shared.out) / "distances.csv", dcsv.str());

    const uts::Dendrogram tree = uts::average_linkage(dist);
    std::ostringstream tcsv;
    tcsv << "left,right,height,id\n";
    for (const auto& merge : tree.merges)
        tcsv << merge.left << "," << merge.right << "," << csv_num(merge.height)
             << "," << merge.id << "\n";
    write_atomic(fs::path(shared.out) / "dendrogram.csv", tcsv.str());

    const uts::ReducedSignatureSet proj = uts::pca_reduce(set, 0.0, std::size_t{2});
    std::ostringstream pcsv;
    pcsv << "model,dataset,seed,x,y\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double x = proj.coordinates(r, 0);
        const double y = proj.coordinates.cols() > 1 ? proj.coordinates(r, 1) : 0.0;
        pcsv << set[i].source.model << "," << set[i].source.dataset << ","
             << set[i].seed << "," << csv_num(x) << "," << csv_num(y) << "\n";
    }
    write_atomic(fs::path(shared.out) / "projection.csv", pcsv.str());
    write_run_meta(shared.out, "compare", descriptor_config(shared));
    return 0;
}

int cmd_retrieve(const std::string& queries_path, const std::string& docs_path,
                 std::size_t cutoff, const Shared& shared) {
    ensure_out_dir(shared.out);
    const uts::PointCloud queries = uts::normalize_rows(load_cloud(queries_path));
    const uts::PointCloud docs = uts::normalize_rows(load_cloud(docs_path));
    const uts::RankedRun run = uts::dense_retrieve(queries, docs, cutoff);
    uts::save_run_trec(run, (fs::path(shared.out) / "run.trec").string());
    write_run_meta(shared.out, "retrieve", descriptor_config(shared));
    return 0;
}

int cmd_retrievability(const std::string& queries_path, const std::string& docs_path,
                       std::size_t cutoff, std::size_t extremes, std::size_t local_k,
                       const Shared& shared) {
    ensure_out_dir(shared.out);
    const uts::DescriptorConfig config = descriptor_config(shared);
    const uts::PointCloud queries = uts::normalize_rows(load_cloud(queries_path));
    const uts::PointCloud docs = uts::normalize_rows(load_cloud(docs_path));

    const uts::RankedRun run = uts::dense_retrieve(queries, docs, cutoff);
    const uts::RetrievabilityTable table =
        uts::retrievability(run, static_cast<std::size_t>(docs.rows()));
    const double g = uts::gini(table);
    const uts::ExtremeDocs picked = uts::select_extremes(table, extremes);

    std::ostringstream rcsv;
    rcsv << "doc,count\n";
    for (std::size_t d = 0; d < table.counts.size(); ++d)
        rcsv << d << "," << table.counts[d] << "\n";
    write_atomic(fs::path(shared.out) / "retrievability.csv", rcsv.str());
    write_atomic(fs::path(shared.out) / "gini.txt", csv_num(g) + "\n");

    const std::size_t k =
        std::min(local_k, static_cast<std::size_t>(docs.rows()) - 1);
    std::ostringstream jsonl;
    auto emit = [&](std::size_t doc, int label) {
        uts::SignatureVector sig = uts::compute_local_signature(docs, doc, k, config);
        sig.source.model = stem_of(docs_path);
        sig.source.dataset = "doc-" + std::to_string(doc);
        nlohmann::ordered_json j = nlohmann::ordered_json::parse(uts::signature_to_json(sig));
        j["retrievable"] = label;
        jsonl << j.dump() << "\n";
    };
    for (std::size_t doc : picked.top) emit(doc, 1);
    for (std::size_t doc : picked.bottom) emit(doc, 0);
    write_atomic(fs::path(shared.out) / "extremes.jsonl", jsonl.str());

    std::cout << "gini " << csv_num(g) << "\n";
    write_run_meta(shared.out, "retrievability", config);
    return 0;
}

int cmd_eval(const std::string& run_path, const std::string& qrels_path,
             const std::vector<std::size_t>& cutoffs, const Shared& shared) {
    ensure_out_dir(shared.out);
    const uts::RankedRun run = uts::load_run_trec(run_path);
    const uts::Qrels qrels = uts::load_qrels_trec(qrels_path);
    const uts::MetricTable table = uts::eval_metrics(run, qrels, cutoffs);

    std::ostringstream csv;
    csv << "metric,cutoff,query,value\n";
    for (const auto& [metric, per_cutoff] : table.per_query)
        for (std::size_t c = 0; c < table.cutoffs.size(); ++c)
            for (std::size_t q = 0; q < table.query_ids.size(); ++q)
                csv << metric << "," << table.cutoffs[c] << ","
                    << table.query_ids[q] << "," << csv_num(per_cutoff[c][q]) << "\n";
    for (const auto& [metric, means] : table.mean)
        for (std::size_t c = 0; c < table.cutoffs.size(); ++c)
            csv << metric << "," << table.cutoffs[c] << ",all,"
                << csv_num(means[c]) << "\n";
    write_atomic(fs::path(shared.out) / "metrics.csv", csv.str());
    for (const auto& q : table.skipped_queries)
        std::cerr << "skipped query without relevant docs: " << q << "\n";
    write_run_meta(shared.out, "eval", descriptor_config(shared));
    return 0;
}

struct TargetRow {
    std::string model;
    std::string dataset;
    std::string value;
};

std::vector<TargetRow> load_targets_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) uts::fail(ErrorKind::Parse, "cannot open " + path);
    std::vector<TargetRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        TargetRow row;
        std::string rest;
        if (!std::getline(ss, row.model, ',') ||
            !std::getline(ss, row.dataset, ',') || !std::getline(ss, row.value))
            uts::fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                            ": expected model,dataset,value");
        if (lineno == 1 && row.model == "model") continue; // optional header
        rows.push_back(std::move(row));
    }
    if (rows.empty()) uts::fail(ErrorKind::Degenerate, "no target rows in " + path);
    return rows;
}

int cmd_predict(const std::string& signatures_path, const std::string& targets_path,
                const std::string& task_name, std::size_t folds, const Shared& shared) {
    ensure_out_dir(shared.out);
    const auto set = load_signature_files({signatures_path});
    const auto target_rows = load_targets_csv(targets_path);
    std::map<std::pair<std::string, std::string>, std::string> lookup;
    for (const auto& row : target_rows)
        lookup[{row.model, row.dataset}] = row.value;

    const uts::ForestTask task = task_name == "regress" ? uts::ForestTask::Regress
                                                        : uts::ForestTask::Classify;
    std::vector<std::string> labels;
    std::vector<double> targets;
    std::vector<std::string> groups;
    for (const auto& sig : set) {
        const auto it = lookup.find({sig.source.model, sig.source.dataset});
        if (it == lookup.end())
            uts::fail(ErrorKind::Schema, "no target for " + sig.source.model + "/" +
                                             sig.source.dataset);
        groups.push_back(sig.source.dataset);
        if (task == uts::ForestTask::Classify) {
            labels.push_back(it->second);
        } else {
            try {
                targets.push_back(std::stod(it->second));
            } catch (const std::exception&) {
                uts::fail(ErrorKind::Parse, "non-numeric regression target '" +
                                                it->second + "'");
            }
        }
    }

    uts::ForestParams params;
    params.seed = shared.seeds.front();
    const uts::CvReport report =
        uts::grouped_cv(set, labels, targets, groups, task, folds, params);

    std::ostringstream cv;
    if (task == uts::ForestTask::Classify) {
        cv << "fold,test_groups,balanced_accuracy\n";
        for (std::size_t f = 0; f < report.folds.size(); ++f) {
            cv << f << ",";
            const auto& gs = report.folds[f].test_groups;
            for (std::size_t i = 0; i < gs.size(); ++i)
                cv << (i ? ";" : "") << gs[i];
            cv << "," << csv_num(report.folds[f].score) << "\n";
        }
        cv << "mean,," << csv_num(report.mean_score) << "\n";
        cv << "sd,," << csv_num(report.sd_score) << "\n";
    } else {
        cv << "fold,test_groups,r2,spearman\n";
        for (std::size_t f = 0; f < report.folds.size(); ++f) {
            cv << f << ",";
            const auto& gs = report.folds[f].test_groups;
            for (std::size_t i = 0; i < gs.size(); ++i)
                cv << (i ? ";" : "") << gs[i];
            cv << "," << csv_num(report.folds[f].score) << ","
               << csv_num(report.folds[f].spearman) << "\n";
        }
        cv << "mean,," << csv_num(report.mean_score) << ",\n";
        cv << "sd,," << csv_num(report.sd_score) << ",\n";
    }
    write_atomic(fs::path(shared.out) / "cv.csv", cv.str());

    std::ostringstream imp;
    imp << "feature,importance\n";
    for (std::size_t j = 0; j < report.feature_names.size(); ++j)
        imp << report.feature_names[j] << ","
            << csv_num(j < report.mean_importance.size() ? report.mean_importance[j]
                                                         : 0.0)
            << "\n";
    write_atomic(fs::path(shared.out) / "importance.csv", imp.str());

    std::cout << (task == uts::ForestTask::Classify ? "balanced_accuracy " : "r2 ")
              << csv_num(report.mean_score) << " +- " << csv_num(report.sd_score)
              << "\n";
    write_run_meta(shared.out, "predict", descriptor_config(shared));
    return 0;
}

double sweep_descriptor_value(const std::string& name, const uts::PointCloud& cloud,
                              uts::Metric metric, std::uint64_t seed) {
    if (name == "effective_rank")
        return uts::effective_rank(uts::covariance_spectrum(cloud));
    if (name == "twonn") return uts::twonn_dimension(cloud, metric);
    if (name == "isoscore") return uts::isoscore(cloud);
    if (name == "vendi") return uts::vendi_score(cloud);
    if (name == "spread") return uts::spread(uts::pairwise_distances(cloud, metric));
    if (name == "magnitude_dimension") {
        const auto curve =
            uts::magnitude_function(uts::pairwise_distances(cloud, metric), 16);
        return uts::magnitude_dimension(curve);
    }
    if (name == "ph_dimension")
        return uts::ph_dimension(cloud, metric, 1.0,
                                 {32, 48, 64, 96, 128, 160, 192, 224}, 5, seed);
    if (name == "uniformity") return uts::uniformity(cloud, 2.0);
    uts::fail(ErrorKind::Capability, "unknown sweep descriptor '" + name + "'");
}

int cmd_sweep(const std::string& input, const std::string& descriptor,
              std::vector<std::size_t> sizes, const Shared& shared) {
    ensure_out_dir(shared.out);
    if (sizes.empty()) uts::fail(ErrorKind::Bounds, "no sweep sizes given");
    if (!std::is_sorted(sizes.begin(), sizes.end()))
        uts::fail(ErrorKind::Bounds, "sweep sizes must be ascending");
    const uts::PointCloud cloud = uts::normalize_rows(load_cloud(input));
    const uts::Metric metric = uts::metric_from_name(shared.metric);
    const auto n = static_cast<std::size_t>(cloud.rows());

    std::ostringstream csv;
    csv << "size,mean,sd,mean_wall_ms\n";
    for (std::size_t size : sizes) {
        if (size > n) {
            std::cerr << "warning: size " << size << " clamped to n=" << n << "\n";
            size = n;
        }
        std::vector<double> values;
        double wall_ms = 0.0;
        for (std::uint64_t seed : shared.seeds) {
            const uts::PointCloud sub = uts::sample(cloud, {size, seed});
            const auto start = std::chrono::steady_clock::now();
            values.push_back(sweep_descriptor_value(descriptor, sub, metric, seed));
            const auto stop = std::chrono::steady_clock::now();
            wall_ms += std::chrono::duration<double, std::milli>(stop - start).count();
        }
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        csv << size << "," << csv_num(mean) << "," << csv_num(std::sqrt(var)) << ","
            << csv_num(wall_ms / static_cast<double>(values.size())) << "\n";
    }
    write_atomic(fs::path(shared.out) / "sweep.csv", csv.str());
    write_run_meta(shared.out, "sweep", descriptor_config(shared));
    return 0;
}

std::map<std::string, std::map<std::string, double>> load_extras_csv(
    const std::string& path) {
    std::ifstream f(path);
    if (!f) uts::fail(ErrorKind::Parse, "cannot open " + path);
    std::map<std::string, std::map<std::string, double>> extras;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string name, model, value;
        if (!std::getline(ss, name, ',') || !std::getline(ss, model, ',') ||
            !std::getline(ss, value))
            uts::fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                            ": expected name,model,value");
        if (lineno == 1 && name == "name") continue;
        try {
            extras[name][model] = std::stod(value);
        } catch (const std::exception&) {
            uts::fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                            ": non-numeric value");
        }
    }
    return extras;
}

int cmd_correlations(const std::string& signatures_path, const std::string& extras_path,
                     const Shared& shared) {
    ensure_out_dir(shared.out);
    const auto set = load_signature_files({signatures_path});
    std::map<std::string, std::map<std::string, double>> extras;
    if (!extras_path.empty()) extras = load_extras_csv(extras_path);
    const uts::CorrelationReport report = uts::correlation_report(set, extras);

    auto matrix_csv = [&report](const Eigen::MatrixXd& mat) {
        std::ostringstream csv;
        csv << "name";
        for (const auto& n : report.names) csv << "," << n;
        csv << "\n";
        for (std::size_t i = 0; i < report.names.size(); ++i) {
            csv << report.names[i];
            for (std::size_t j = 0; j < report.names.size(); ++j)
                csv << ","
                    << csv_num(mat(static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(j)));
            csv << "\n";
        }
        return csv.str();
    };
    write_atomic(fs::path(shared.out) / "correlation_mean.csv", matrix_csv(report.mean));
    write_atomic(fs::path(shared.out) / "correlation_variance.csv",
                 matrix_csv(report.variance));
    write_atomic(fs::path(shared.out) / "correlation_missing.csv",
                 matrix_csv(report.missing_fraction));
    write_run_meta(shared.out, "correlations", descriptor_config(shared));
    return 0;
}

int cmd_normalize(const std::string& signatures_path, const Shared& shared) {
    ensure_out_dir(shared.out);
    const auto set = load_signature_files({signatures_path});
    const uts::NormalizationState norm = uts::fit_normalization(set);

    std::ostringstream payload;
    for (const auto& sig : set)
        payload << uts::signature_to_json(uts::apply_normalization(sig, norm)) << "\n";
    write_atomic(fs::path(shared.out) / "normalized.jsonl", payload.str());

    nlohmann::ordered_json state;
    state["names"] = norm.names;
    state["max_abs"] = norm.max_abs;
    std::vector<int> constant;
    for (bool c : norm.constant) constant.push_back(c ? 1 : 0);
    state["constant"] = constant;
    write_atomic(fs::path(shared.out) / "normalization.json", state.dump(2) + "\n");
    write_run_meta(shared.out, "normalize", descriptor_config(shared));
    return 0;
}

int cmd_reduce(const std::string& signatures_path, double variance_target,
               std::size_t components, const Shared& shared) {
    ensure_out_dir(shared.out);
    const auto set = load_signature_files({signatures_path});
    std::optional<std::size_t> explicit_l;
    if (components > 0) explicit_l = components;
    const uts::ReducedSignatureSet reduced =
        uts::pca_reduce(set, variance_target, explicit_l);

    std::ostringstream coords;
    coords << "model,dataset,seed";
    for (Eigen::Index j = 0; j < reduced.coordinates.cols(); ++j)
        coords << ",pc" << (j + 1);
    coords << "\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
        coords << set[i].source.model << "," << set[i].source.dataset << ","
               << set[i].seed;
        for (Eigen::Index j = 0; j < reduced.coordinates.cols(); ++j)
            coords << ","
                   << csv_num(reduced.coordinates(static_cast<Eigen::Index>(i), j));
        coords << "\n";
    }
    write_atomic(fs::path(shared.out) / "coordinates.csv", coords.str());

    std::ostringstream loads;
    loads << "component";
    for (const auto& n : reduced.component_names) loads << "," << n;
    loads << "\n";
    for (Eigen::Index i = 0; i < reduced.loadings.rows(); ++i) {
        loads << "pc" << (i + 1);
        for (Eigen::Index j = 0; j < reduced.loadings.cols(); ++j)
            loads << "," << csv_num(reduced.loadings(i, j));
        loads << "\n";
    }
    write_atomic(fs::path(shared.out) / "loadings.csv", loads.str());

    std::ostringstream evr;
    evr << "component,explained_variance_ratio\n";
    for (Eigen::Index j = 0; j < reduced.explained_variance_ratio.size(); ++j)
        evr << "pc" << (j + 1) << ","
            << csv_num(reduced.explained_variance_ratio(j)) << "\n";
    write_atomic(fs::path(shared.out) / "explained_variance.csv", evr.str());
    write_run_meta(shared.out, "reduce", descriptor_config(shared));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    if (const char* env = std::getenv("UTS_THREADS")) {
        const int threads = std::atoi(env);
        if (threads >= 1) omp_set_num_threads(threads);
    }
#endif

    CLI::App app{"Unified topological signatures of embedding point clouds"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);

    Shared shared;

    auto* sig_cmd = app.add_subcommand("signature", "global signatures per (input, seed)");
    std::vector<std::string> sig_inputs;
    std::string sig_dataset;
    sig_cmd->add_option("inputs", sig_inputs, "embedding files (.utse or .csv)")
        ->required();
    sig_cmd->add_option("--dataset", sig_dataset, "dataset label for all inputs");
    add_shared(sig_cmd, shared);

    auto* local_cmd = app.add_subcommand("local-signature",
                                         "signature of one point's neighborhood");
    std::string local_input;
    std::size_t local_anchor = 0, local_k = 100;
    local_cmd->add_option("input", local_input)->required();
    local_cmd->add_option("--anchor", local_anchor, "anchor point index");
    local_cmd->add_option("--k", local_k, "neighborhood size");
    add_shared(local_cmd, shared);

    auto* compare_cmd = app.add_subcommand("compare", "distances + dendrogram + projection");
    std::vector<std::string> compare_files;
    compare_cmd->add_option("signatures", compare_files, "signature JSONL files")
        ->required();
    add_shared(compare_cmd, shared);

    auto* retrieve_cmd = app.add_subcommand("retrieve", "exact top-c dense retrieval");
    std::string rq, rd;
    std::size_t r_cutoff = 100;
    retrieve_cmd->add_option("--queries", rq)->required();
    retrieve_cmd->add_option("--docs", rd)->required();
    retrieve_cmd->add_option("--cutoff", r_cutoff);
    add_shared(retrieve_cmd, shared);

    auto* rb_cmd = app.add_subcommand("retrievability", "bias audit + extreme local signatures");
    std::string bq, bd;
    std::size_t b_cutoff = 100, b_extremes = 100, b_local_k = 100;
    rb_cmd->add_option("--queries", bq)->required();
    rb_cmd->add_option("--docs", bd)->required();
    rb_cmd->add_option("--cutoff", b_cutoff);
    rb_cmd->add_option("--extremes", b_extremes, "docs per tail");
    rb_cmd->add_option("--local-k", b_local_k);
    add_shared(rb_cmd, shared);

    auto* eval_cmd = app.add_subcommand("eval", "Recall/MAP/NDCG of a TREC run");
    std::string e_run, e_qrels;
    std::vector<std::size_t> e_cutoffs = {10, 100};
    eval_cmd->add_option("--run", e_run)->required();
    eval_cmd->add_option("--qrels", e_qrels)->required();
    eval_cmd->add_option("--cutoffs", e_cutoffs)->delimiter(',');
    add_shared(eval_cmd, shared);

    auto* predict_cmd = app.add_subcommand("predict", "grouped-CV forest prediction");
    std::string p_sigs, p_targets, p_task = "classify";
    std::size_t p_folds = 3;
    predict_cmd->add_option("--signatures", p_sigs)->required();
    predict_cmd->add_option("--targets", p_targets, "CSV: model,dataset,value")
        ->required();
    predict_cmd->add_option("--task", p_task)
        ->check(CLI::IsMember({"classify", "regress"}));
    predict_cmd->add_option("--folds", p_folds);
    add_shared(predict_cmd, shared);

    auto* sweep_cmd = app.add_subcommand("sweep", "descriptor value vs sample size");
    std::string s_input, s_descriptor;
    std::vector<std::size_t> s_sizes;
    sweep_cmd->add_option("--input", s_input)->required();
    sweep_cmd->add_option("--descriptor", s_descriptor)->required();
    sweep_cmd->add_option("--sizes", s_sizes)->delimiter(',')->required();
    add_shared(sweep_cmd, shared);

    auto* corr_cmd = app.add_subcommand("correlations", "descriptor correlation report");
    std::string c_sigs, c_extras;
    corr_cmd->add_option("--signatures", c_sigs)->required();
    corr_cmd->add_option("--extras", c_extras, "CSV: name,model,value");
    add_shared(corr_cmd, shared);

    auto* norm_cmd = app.add_subcommand("normalize", "fit and apply max-abs normalization");
    std::string n_sigs;
    norm_cmd->add_option("--signatures", n_sigs)->required();
    add_shared(norm_cmd, shared);

    auto* reduce_cmd = app.add_subcommand("reduce", "PCA reduction of signatures");
    std::string d_sigs;
    double d_variance = 0.91;
    std::size_t d_components = 0;
    reduce_cmd->add_option("--signatures", d_sigs)->required();
    reduce_cmd->add_option("--variance", d_variance, "explained-variance target");
    reduce_cmd->add_option("--components", d_components, "explicit dimension (overrides)");
    add_shared(reduce_cmd, shared);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sig_cmd->parsed()) return cmd_signature(sig_inputs, shared, sig_dataset);
        if (local_cmd->parsed())
            return cmd_local_signature(local_input, shared, local_anchor, local_k);
        if (compare_cmd->parsed()) return cmd_compare(compare_files, shared);
        if (retrieve_cmd->parsed()) return cmd_retrieve(rq, rd, r_cutoff, shared);
        if (rb_cmd->parsed())
            return cmd_retrievability(bq, bd, b_cutoff, b_extremes, b_local_k, shared);
        if (eval_cmd->parsed()) return cmd_eval(e_run, e_qrels, e_cutoffs, shared);
        if (predict_cmd->parsed())
            return cmd_predict(p_sigs, p_targets, p_task, p_folds, shared);
        if (sweep_cmd->parsed()) return cmd_sweep(s_input, s_descriptor, s_sizes, shared);
        if (corr_cmd->parsed()) return cmd_correlations(c_sigs, c_extras, shared);
        if (norm_cmd->parsed()) return cmd_normalize(n_sigs, shared);
        if (reduce_cmd->parsed()) return cmd_reduce(d_sigs, d_variance, d_components, shared);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
