// rnsc: robust-node spectral clustering experiments.
//
//   rnsc run --config exp.cfg [--seed S] [--output DIR] [--k-nn K] [--m-nodes M] [--m-eigs E]
//   rnsc replicate {usps|mnist|blobs-demo} [--data DIR] [overrides...]
//   rnsc score --dataset PATH [--kind csv|idx] [--labels PATH] ... --output DIR
//   rnsc bench-eig --sizes 500,1000,2000 [--method auto|dense|iterative]
//
// Exit status: 0 success, 2 invalid arguments or configuration, 1 runtime failure.

#include "rnsc/dataset.hpp"
#include "rnsc/eigen.hpp"
#include "rnsc/experiment.hpp"
#include "rnsc/graph.hpp"
#include "rnsc/spade.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    std::optional<int> k_nn;
    std::optional<int> m_nodes;
    std::optional<int> m_eigs;
    std::string style = "human";

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "k-means / blob seed");
        cmd->add_option("--output", output, "output directory");
        cmd->add_option("--k-nn", k_nn, "neighbours per point");
        cmd->add_option("--m-nodes", m_nodes, "robust subset size");
        cmd->add_option("--m-eigs", m_eigs, "generalized eigenpairs used for scoring");
        cmd->add_option("--style", style, "report style printed to stdout")->check(CLI::IsMember({"human", "machine"}));
    }

    void apply(rnsc::ConfigMap& map) const {
        if (seed) map["seed"] = std::to_string(*seed);
        if (output) map["output.dir"] = *output;
        if (k_nn) map["k_nn"] = std::to_string(*k_nn);
        if (m_nodes) map["m_nodes"] = std::to_string(*m_nodes);
        if (m_eigs) map["m_eigs"] = std::to_string(*m_eigs);
    }
};

rnsc::ConfigMap preset(const std::string& name, const std::filesystem::path& data) {
    if (name == "usps") {
        return {{"dataset.kind", "csv"},           {"dataset.path", (data / "usps.csv").string()},
                {"dataset.label_column", "last"}, {"dataset.name", "USPS"},
                {"k_clusters", "10"},             {"k_nn", "10"},
                {"m_nodes", "2000"},              {"output.dir", "out/usps"}};
    }
    if (name == "mnist") {
        return {{"dataset.kind", "idx"},
                {"dataset.path", (data / "t10k-images-idx3-ubyte").string()},
                {"dataset.labels_path", (data / "t10k-labels-idx1-ubyte").string()},
                {"dataset.name", "MNIST"},
                {"k_clusters", "10"},
                {"k_nn", "10"},
                {"m_nodes", "1500"},
                {"output.dir", "out/mnist"}};
    }
    return {{"dataset.kind", "blobs"},  {"dataset.name", "blobs-demo"}, {"blobs.n_per_cluster", "200"},
            {"blobs.d", "2"},           {"blobs.spread", "0.08"},       {"blobs.noise_dims", "6"},
            {"k_clusters", "3"},        {"k_nn", "10"},                 {"m_nodes", "200"},
            {"seed", "1"},              {"output.dir", "out/blobs-demo"}};
}

int run_config(rnsc::ConfigMap map, const Overrides& overrides) {
    overrides.apply(map);
    const auto cfg = rnsc::config_from_map(map);
    const auto report = rnsc::run_experiment(cfg);
    const auto style = overrides.style == "machine" ? rnsc::ReportStyle::machine : rnsc::ReportStyle::human;
    std::cout << rnsc::format_report(report, style);
    if (!cfg.output_dir.empty()) std::cerr << "report written to " << (cfg.output_dir / "report.txt") << '\n';
    return 0;
}

rnsc::EigenMethod parse_method(const std::string& s) {
    if (s == "dense") return rnsc::EigenMethod::dense;
    if (s == "iterative") return rnsc::EigenMethod::iterative;
    return rnsc::EigenMethod::automatic;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust-node spectral clustering experiments"};
    app.require_subcommand(1, 1);

    std::string config_path;
    Overrides run_over;
    auto* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("--config", config_path, "experiment config file")->required();
    run_over.attach(run);

    std::string preset_name;
    std::string data_dir = "data";
    Overrides rep_over;
    auto* replicate = app.add_subcommand("replicate", "run a baked-in benchmark configuration");
    replicate->add_option("preset", preset_name, "usps, mnist or blobs-demo")
        ->required()
        ->check(CLI::IsMember({"usps", "mnist", "blobs-demo"}));
    replicate->add_option("--data", data_dir, "directory holding the dataset files");
    rep_over.attach(replicate);

    std::string score_path, score_kind = "csv", score_out = "out/score";
    std::optional<std::string> score_labels;
    std::optional<int> score_label_col;
    int score_knn = 10, score_k = 10, score_m_eigs = 0;
    std::string score_method = "auto";
    bool dump_graph = false;
    auto* score = app.add_subcommand("score", "write per-node robustness scores");
    score->add_option("--dataset", score_path, "CSV or IDX image file")->required();
    score->add_option("--kind", score_kind, "csv or idx")->check(CLI::IsMember({"csv", "idx"}));
    score->add_option("--labels", score_labels, "IDX label file");
    score->add_option("--label-column", score_label_col, "CSV label column");
    score->add_option("--k-nn", score_knn, "neighbours per point");
    score->add_option("--k-clusters", score_k, "embedding dimension");
    score->add_option("--m-eigs", score_m_eigs, "generalized eigenpairs (0 = k-clusters)");
    score->add_option("--eig-method", score_method)->check(CLI::IsMember({"auto", "dense", "iterative"}));
    score->add_option("--output", score_out, "output directory");
    score->add_flag("--dump-graph", dump_graph, "also write the input k-NN graph as an edge list");

    std::vector<int> sizes = {250, 500, 1000, 2000};
    std::string bench_method = "dense";
    int bench_knn = 10, bench_k = 10;
    std::uint64_t bench_seed = 1;
    auto* bench = app.add_subcommand("bench-eig", "time Laplacian eigendecompositions by size");
    bench->add_option("--sizes", sizes, "node counts")->delimiter(',');
    bench->add_option("--method", bench_method)->check(CLI::IsMember({"auto", "dense", "iterative"}));
    bench->add_option("--k-nn", bench_knn);
    bench->add_option("--k", bench_k, "eigenpairs requested");
    bench->add_option("--seed", bench_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*run) return run_config(rnsc::load_config_map(config_path), run_over);
        if (*replicate) return run_config(preset(preset_name, data_dir), rep_over);
        if (*score) {
            if (score_knn < 1 || score_k < 1 || score_m_eigs < 0) {
                throw rnsc::ConfigError({"--k-nn, --k-clusters must be positive and --m-eigs nonnegative"});
            }
            if (!std::filesystem::exists(score_path)) {
                throw rnsc::ConfigError({"--dataset: no such file '" + score_path + "'"});
            }
            const auto ps = score_kind == "idx"
                                ? rnsc::load_idx(score_path, score_labels ? std::optional<std::filesystem::path>(*score_labels)
                                                                          : std::nullopt)
                                : rnsc::load_csv(score_path, score_label_col);
            rnsc::SpadeOptions opt;
            opt.eigen.method = parse_method(score_method);
            const auto result = rnsc::robustness_run(ps, score_knn, score_k, score_m_eigs > 0 ? score_m_eigs : score_k, opt);
            const std::filesystem::path out = score_out;
            std::filesystem::create_directories(out);
            rnsc::write_spade_report(result.report, out / "scores.csv", out / "eigenvalues.txt");
            if (dump_graph) {
                std::ofstream edges(out / "g_input.edges");
                rnsc::write_edge_list(result.g_input, edges);
            }
            std::cout << "scored " << ps.size() << " points; wrote " << (out / "scores.csv") << '\n';
            return 0;
        }
        if (*bench) {
            rnsc::EigenOptions opt;
            opt.method = parse_method(bench_method);
            std::cout << std::setw(8) << "n" << std::setw(14) << "graph (s)" << std::setw(14) << "eig (s)" << '\n';
            for (int n : sizes) {
                if (n < 20) throw rnsc::ConfigError({"--sizes: every size must be >= 20"});
                const auto ps = rnsc::make_blobs((n + 9) / 10, 10, 10, 0.3, 0, bench_seed);
                auto g = rnsc::timed([&] { return rnsc::build_knn_graph(ps, bench_knn); });
                const auto lap = rnsc::laplacian(g.value);
                auto eig = rnsc::timed([&] { return rnsc::bottom_nonzero_eigenpairs(lap, bench_k, opt); });
                std::cout << std::setw(8) << ps.size() << std::setw(14) << std::fixed << std::setprecision(4)
                          << g.seconds << std::setw(14) << eig.seconds << '\n';
            }
            return 0;
        }
    } catch (const rnsc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
