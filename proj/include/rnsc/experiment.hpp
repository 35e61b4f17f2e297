#pragma once

// Config-driven comparison of plain vs. robust-node spectral clustering.
//
// Config file: one `key = value` per line, `#` starts a comment.
//
//   dataset.kind          idx | csv | blobs                (required)
//   dataset.path          images file (idx) or table (csv)  (idx, csv)
//   dataset.labels_path   IDX label file                    (optional)
//   dataset.label_column  CSV label column index or `last`  (optional)
//   blobs.n_per_cluster, blobs.d, blobs.spread, blobs.noise_dims, blobs.seed
//   k_clusters            number of clusters                 (required)
//   k_nn                  neighbours per point               (default 10)
//   m_nodes               robust subset size                 (required)
//   m_eigs                eigenpairs for scoring, 0 = k_clusters
//   k_nn_output           neighbours in embedded space, 0 = k_nn
//   seed                  k-means seed                       (default 0)
//   metric                euclidean | cosine
//   eig.method            auto | dense | iterative
//   output.dir            where report.txt and scores.csv go (optional)
//
// Report file: `key=value` lines in a fixed order; absent accuracies are `na`.

#include "rnsc/clustering.hpp"
#include "rnsc/dataset.hpp"
#include "rnsc/error.hpp"
#include "rnsc/metrics.hpp"
#include "rnsc/pipeline.hpp"
#include "rnsc/spade.hpp"

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace rnsc {

enum class DatasetKind { idx, csv, blobs };

struct BlobParams {
    int n_per_cluster = 200;
    int d = 2;
    double spread = 0.08;
    int noise_dims = 0;
    std::optional<std::uint64_t> seed;  // defaults to the experiment seed
};

struct ExperimentConfig {
    DatasetKind kind = DatasetKind::blobs;
    std::filesystem::path dataset_path;
    std::optional<std::filesystem::path> labels_path;
    std::optional<int> label_column;  // -1 means last column
    std::string dataset_name;
    BlobParams blobs;
    int k_clusters = 0;
    int k_nn = 10;
    int m_nodes = 0;
    int m_eigs = 0;
    int k_nn_output = 0;
    std::uint64_t seed = 0;
    Metric metric = Metric::euclidean;
    EigenMethod eig_method = EigenMethod::automatic;
    std::filesystem::path output_dir;
};

using ConfigMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trimmed(std::string_view s) { return std::string(trim(s)); }

template <class T>
std::optional<T> parse_number(const std::string& s) {
    T value{};
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if constexpr (std::is_floating_point_v<T>) {
        auto v = parse_double(s);
        if (!v) return std::nullopt;
        return static_cast<T>(*v);
    } else {
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || ptr != end) return std::nullopt;
        return value;
    }
}

}  // namespace detail

/// Splits config text into key/value pairs. Syntax problems are collected,
/// not thrown one by one.
inline ConfigMap parse_config_text(std::istream& in) {
    ConfigMap out;
    std::vector<std::string> problems;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const auto key = detail::trimmed(body.substr(0, eq));
        if (key.empty()) {
            problems.push_back("line " + std::to_string(line_no) + ": empty key");
            continue;
        }
        out[key] = detail::trimmed(body.substr(eq + 1));
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return out;
}

inline ConfigMap load_config_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"config: cannot open " + path.string()});
    return parse_config_text(in);
}

/// Builds and validates a config; every bad or missing field is reported.
inline ExperimentConfig config_from_map(const ConfigMap& map) {
    ExperimentConfig cfg;
    std::vector<std::string> problems;
    std::map<std::string, bool> used;
    for (const auto& [k, v] : map) used[k] = false;

    auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto it = map.find(key);
        if (it == map.end()) return std::nullopt;
        used[key] = true;
        return it->second;
    };
    auto get_int = [&](const std::string& key, int& target, bool required, int minimum) {
        auto raw = get(key);
        if (!raw) {
            if (required) problems.push_back(key + ": missing");
            return;
        }
        auto v = detail::parse_number<int>(*raw);
        if (!v) {
            problems.push_back(key + ": not an integer: '" + *raw + "'");
        } else if (*v < minimum) {
            problems.push_back(key + ": must be >= " + std::to_string(minimum) + ", got " + *raw);
        } else {
            target = *v;
        }
    };

    if (auto kind = get("dataset.kind")) {
        if (*kind == "idx") cfg.kind = DatasetKind::idx;
        else if (*kind == "csv") cfg.kind = DatasetKind::csv;
        else if (*kind == "blobs") cfg.kind = DatasetKind::blobs;
        else problems.push_back("dataset.kind: expected idx, csv or blobs, got '" + *kind + "'");
    } else {
        problems.push_back("dataset.kind: missing");
    }
    if (auto name = get("dataset.name")) cfg.dataset_name = *name;

    if (auto path = get("dataset.path")) cfg.dataset_path = *path;
    if (cfg.kind != DatasetKind::blobs) {
        if (cfg.dataset_path.empty()) {
            problems.push_back("dataset.path: missing");
        } else if (!std::filesystem::exists(cfg.dataset_path)) {
            problems.push_back("dataset.path: no such file '" + cfg.dataset_path.string() + "'");
        }
    }
    if (auto labels = get("dataset.labels_path")) {
        cfg.labels_path = *labels;
        if (!std::filesystem::exists(*cfg.labels_path)) {
            problems.push_back("dataset.labels_path: no such file '" + *labels + "'");
        }
    }
    if (auto col = get("dataset.label_column")) {
        if (*col == "last") {
            cfg.label_column = -1;
        } else if (auto v = detail::parse_number<int>(*col); v && *v >= 0) {
            cfg.label_column = *v;
        } else {
            problems.push_back("dataset.label_column: expected a column index or 'last', got '" + *col + "'");
        }
    }

    get_int("blobs.n_per_cluster", cfg.blobs.n_per_cluster, false, 1);
    get_int("blobs.d", cfg.blobs.d, false, 1);
    get_int("blobs.noise_dims", cfg.blobs.noise_dims, false, 0);
    if (auto spread = get("blobs.spread")) {
        auto v = detail::parse_number<double>(*spread);
        if (!v || !(*v > 0.0)) problems.push_back("blobs.spread: expected a positive number, got '" + *spread + "'");
        else cfg.blobs.spread = *v;
    }
    if (auto bseed = get("blobs.seed")) {
        auto v = detail::parse_number<std::uint64_t>(*bseed);
        if (!v) problems.push_back("blobs.seed: not an unsigned integer: '" + *bseed + "'");
        else cfg.blobs.seed = *v;
    }

    get_int("k_clusters", cfg.k_clusters, true, 1);
    get_int("k_nn", cfg.k_nn, false, 1);
    get_int("m_nodes", cfg.m_nodes, true, 1);
    get_int("m_eigs", cfg.m_eigs, false, 0);
    get_int("k_nn_output", cfg.k_nn_output, false, 0);
    if (cfg.k_clusters > 0 && cfg.m_nodes > 0 && cfg.m_nodes < cfg.k_clusters) {
        problems.push_back("m_nodes: must be >= k_clusters (" + std::to_string(cfg.k_clusters) + ")");
    }
    if (auto seed = get("seed")) {
        auto v = detail::parse_number<std::uint64_t>(*seed);
        if (!v) problems.push_back("seed: not an unsigned integer: '" + *seed + "'");
        else cfg.seed = *v;
    }
    if (auto metric = get("metric")) {
        if (*metric == "euclidean") cfg.metric = Metric::euclidean;
        else if (*metric == "cosine") cfg.metric = Metric::cosine;
        else problems.push_back("metric: expected euclidean or cosine, got '" + *metric + "'");
    }
    if (auto method = get("eig.method")) {
        if (*method == "auto") cfg.eig_method = EigenMethod::automatic;
        else if (*method == "dense") cfg.eig_method = EigenMethod::dense;
        else if (*method == "iterative") cfg.eig_method = EigenMethod::iterative;
        else problems.push_back("eig.method: expected auto, dense or iterative, got '" + *method + "'");
    }
    if (auto dir = get("output.dir")) cfg.output_dir = *dir;

    for (const auto& [key, was_used] : used) {
        if (!was_used) problems.push_back(key + ": unknown key");
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    return config_from_map(load_config_map(path));
}

inline PointSet load_dataset(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case DatasetKind::idx: return load_idx(cfg.dataset_path, cfg.labels_path);
        case DatasetKind::csv: {
            std::optional<int> column = cfg.label_column;
            if (column && *column < 0) {
                // resolve "last" from the first line's width
                std::ifstream in(cfg.dataset_path);
                std::string first;
                std::getline(in, first);
                column = static_cast<int>(detail::split_commas(detail::trim(first)).size()) - 1;
            }
            return load_csv(cfg.dataset_path, column);
        }
        case DatasetKind::blobs:
            return make_blobs(cfg.blobs.n_per_cluster, cfg.k_clusters, cfg.blobs.d, cfg.blobs.spread,
                              cfg.blobs.noise_dims, cfg.blobs.seed.value_or(cfg.seed));
    }
    throw Error("unknown dataset kind");
}

struct ExperimentReport {
    std::string dataset;
    int n = 0;
    int d = 0;
    int k_clusters = 0;
    int k_nn = 0;
    int m_nodes = 0;
    int m_eigs = 0;
    std::uint64_t seed = 0;
    std::optional<double> acc_baseline;
    std::optional<double> acc_robust;
    StageTimes stage_seconds;  // robust pipeline stages
    double eig_time_full = 0.0;    // baseline clustering eigendecomposition
    double eig_time_subset = 0.0;  // robust-subset clustering eigendecomposition
    double eig_time_spade = 0.0;   // scoring: full embedding + generalized solve
    double speedup = 0.0;          // eig_time_full / eig_time_subset
    double total_time_baseline = 0.0;
    double total_time_robust = 0.0;

    friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Everything run_experiment produced, for callers that want more than the report.
struct ExperimentOutcome {
    ExperimentReport report;
    ClusterAssignment baseline;
    RobustClusteringResult robust;
};

inline ExperimentOutcome run_experiment_detailed(const ExperimentConfig& cfg, const PointSet& ps) {
    std::vector<std::string> problems;
    if (cfg.k_nn >= ps.size()) problems.push_back("k_nn: must be < N (" + std::to_string(ps.size()) + ")");
    if (cfg.m_nodes > ps.size()) problems.push_back("m_nodes: must be <= N (" + std::to_string(ps.size()) + ")");
    if (cfg.k_clusters > ps.size()) problems.push_back("k_clusters: must be <= N (" + std::to_string(ps.size()) + ")");
    if (!problems.empty()) throw ConfigError(std::move(problems));

    PipelineOptions opt;
    opt.metric = cfg.metric;
    opt.m_eigs = cfg.m_eigs;
    opt.k_nn_output = cfg.k_nn_output;
    opt.eigen.method = cfg.eig_method;

    ExperimentOutcome out;
    const auto base_start = std::chrono::steady_clock::now();
    auto base = spectral_clustering_run(ps, cfg.k_clusters, cfg.k_nn, cfg.seed, opt.spectral());
    const std::chrono::duration<double> base_total = std::chrono::steady_clock::now() - base_start;
    out.baseline = base.assignment;
    out.robust = robust_spectral_clustering(ps, cfg.k_clusters, cfg.k_nn, cfg.m_nodes, cfg.seed, opt);

    auto& r = out.report;
    r.dataset = cfg.dataset_name.empty() ? ps.name() : cfg.dataset_name;
    r.n = ps.size();
    r.d = ps.dim();
    r.k_clusters = cfg.k_clusters;
    r.k_nn = cfg.k_nn;
    r.m_nodes = cfg.m_nodes;
    r.m_eigs = cfg.m_eigs > 0 ? cfg.m_eigs : cfg.k_clusters;
    r.seed = cfg.seed;
    if (ps.has_labels()) {
        r.acc_baseline = acc(out.baseline.labels, *ps.labels());
        r.acc_robust = acc(out.robust.full_labels, *ps.labels());
    }
    r.stage_seconds = out.robust.timings;
    r.eig_time_full = base.eig_seconds;
    r.eig_time_subset = out.robust.seconds("subset_eig");
    r.eig_time_spade = out.robust.seconds("embed_full_or_subset") + out.robust.seconds("spade");
    r.speedup = r.eig_time_subset > 0.0 ? r.eig_time_full / r.eig_time_subset : 0.0;
    r.total_time_baseline = base_total.count();
    r.total_time_robust = out.robust.seconds("total");
    return out;
}

inline std::string format_report_machine(const ExperimentReport& report);

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const PointSet ps = load_dataset(cfg);
    auto outcome = run_experiment_detailed(cfg, ps);
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream report(cfg.output_dir / "report.txt");
        if (!report) throw Error("cannot write " + (cfg.output_dir / "report.txt").string());
        report << format_report_machine(outcome.report);
        write_spade_report(outcome.robust.spade, cfg.output_dir / "scores.csv",
                           cfg.output_dir / "eigenvalues.txt");
    }
    return outcome.report;
}

enum class ReportStyle { human, machine };

namespace detail {

inline std::string exact(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

inline std::string optional_exact(const std::optional<double>& v) { return v ? exact(*v) : "na"; }

}  // namespace detail

/// Stable `key=value` lines; doubles carry 17 significant digits so parsing
/// them back is lossless.
inline std::string format_report_machine(const ExperimentReport& r) {
    std::ostringstream out;
    out << "dataset=" << r.dataset << '\n'
        << "n=" << r.n << '\n'
        << "d=" << r.d << '\n'
        << "k_clusters=" << r.k_clusters << '\n'
        << "k_nn=" << r.k_nn << '\n'
        << "m_nodes=" << r.m_nodes << '\n'
        << "m_eigs=" << r.m_eigs << '\n'
        << "seed=" << r.seed << '\n'
        << "acc_baseline=" << detail::optional_exact(r.acc_baseline) << '\n'
        << "acc_robust=" << detail::optional_exact(r.acc_robust) << '\n';
    for (const auto& [stage, seconds] : r.stage_seconds) out << "time." << stage << '=' << detail::exact(seconds) << '\n';
    out << "eig_time_full=" << detail::exact(r.eig_time_full) << '\n'
        << "eig_time_subset=" << detail::exact(r.eig_time_subset) << '\n'
        << "eig_time_spade=" << detail::exact(r.eig_time_spade) << '\n'
        << "speedup=" << detail::exact(r.speedup) << '\n'
        << "total_time_baseline=" << detail::exact(r.total_time_baseline) << '\n'
        << "total_time_robust=" << detail::exact(r.total_time_robust) << '\n';
    return out.str();
}

inline ExperimentReport parse_report(std::istream& in) {
    ExperimentReport r;
    std::vector<std::string> problems;
    std::string line;
    auto number = [&](const std::string& key, const std::string& value, auto& target) {
        using T = std::remove_reference_t<decltype(target)>;
        auto v = detail::parse_number<T>(value);
        if (!v) problems.push_back(key + ": cannot parse '" + value + "'");
        else target = *v;
    };
    auto optional_number = [&](const std::string& key, const std::string& value, std::optional<double>& target) {
        if (value == "na") {
            target.reset();
            return;
        }
        double v = 0.0;
        number(key, value, v);
        target = v;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("malformed line '" + line + "'");
            continue;
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "dataset") r.dataset = value;
        else if (key == "n") number(key, value, r.n);
        else if (key == "d") number(key, value, r.d);
        else if (key == "k_clusters") number(key, value, r.k_clusters);
        else if (key == "k_nn") number(key, value, r.k_nn);
        else if (key == "m_nodes") number(key, value, r.m_nodes);
        else if (key == "m_eigs") number(key, value, r.m_eigs);
        else if (key == "seed") number(key, value, r.seed);
        else if (key == "acc_baseline") optional_number(key, value, r.acc_baseline);
        else if (key == "acc_robust") optional_number(key, value, r.acc_robust);
        else if (key.rfind("time.", 0) == 0) {
            double v = 0.0;
            number(key, value, v);
            r.stage_seconds.emplace_back(key.substr(5), v);
        }
        else if (key == "eig_time_full") number(key, value, r.eig_time_full);
        else if (key == "eig_time_subset") number(key, value, r.eig_time_subset);
        else if (key == "eig_time_spade") number(key, value, r.eig_time_spade);
        else if (key == "speedup") number(key, value, r.speedup);
        else if (key == "total_time_baseline") number(key, value, r.total_time_baseline);
        else if (key == "total_time_robust") number(key, value, r.total_time_robust);
        else problems.push_back("unknown key '" + key + "'");
    }
    if (!problems.empty()) throw FormatError("report: " + problems.front());
    return r;
}

/// Human style: a baseline-vs-robust table with accuracy (two decimals, `n/a`
/// when unlabeled) and eigendecomposition seconds.
inline std::string format_report(const ExperimentReport& r, ReportStyle style) {
    if (style == ReportStyle::machine) return format_report_machine(r);
    auto pct = [](const std::optional<double>& v) {
        if (!v) return std::string("n/a");
        std::ostringstream s;
        s << std::fixed << std::setprecision(2) << 100.0 * *v;
        return s.str();
    };
    std::ostringstream out;
    out << "dataset " << r.dataset << "  (N=" << r.n << ", d=" << r.d << ")\n"
        << "k_clusters=" << r.k_clusters << "  k_nn=" << r.k_nn << "  m_nodes=" << r.m_nodes
        << "  m_eigs=" << r.m_eigs << "  seed=" << r.seed << "\n\n";
    out << std::left << std::setw(16) << "method" << std::right << std::setw(10) << "ACC (%)" << std::setw(16)
        << "eig time (s)" << '\n';
    out << std::left << std::setw(16) << "k-NN baseline" << std::right << std::setw(10) << pct(r.acc_baseline)
        << std::setw(16) << std::fixed << std::setprecision(4) << r.eig_time_full << '\n';
    out << std::left << std::setw(16) << "robust nodes" << std::right << std::setw(10) << pct(r.acc_robust)
        << std::setw(16) << std::fixed << std::setprecision(4) << r.eig_time_subset << '\n';
    out << "\neigendecomposition speedup " << std::setprecision(2) << r.speedup << "x"
        << "  (scoring solves " << std::setprecision(4) << r.eig_time_spade << " s)\n"
        << "end-to-end seconds: baseline " << r.total_time_baseline << ", robust " << r.total_time_robust << '\n';
    return out.str();
}

}  // namespace rnsc
