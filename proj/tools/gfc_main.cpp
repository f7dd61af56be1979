// Command-line front end: graph generation, exact and filtering-based
// clustering, and the experiment sweeps, all emitting one CSV row per trial.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gfc/harness.hpp"

namespace {

struct ModelOptions {
    int k = 2;
    int s = 0;
    int n = 0; // alternative to s; s = n / k
    double q = 0.3;
    double r = 0.1;
    std::string graph_path;
    std::string labels_path;
};

struct SeedOptions {
    std::string seeds_range; // "a..b" inclusive
    int trials = 10;
};

void add_model_options(CLI::App* cmd, ModelOptions& opts, bool allow_graph = true) {
    cmd->add_option("--k", opts.k, "number of blocks / clusters");
    cmd->add_option("--s", opts.s, "vertices per block");
    cmd->add_option("--n", opts.n, "total vertices (block size is n/k, rounded)");
    cmd->add_option("--q", opts.q, "within-block surplus edge probability");
    cmd->add_option("--r", opts.r, "base edge probability");
    if (allow_graph) {
        cmd->add_option("--graph", opts.graph_path, "edge-list file instead of a model");
        cmd->add_option("--labels", opts.labels_path, "truth labels for a loaded graph (one block index per line)");
    }
}

void add_seed_options(CLI::App* cmd, SeedOptions& opts) {
    cmd->add_option("--seeds", opts.seeds_range, "inclusive seed range a..b");
    cmd->add_option("--trials", opts.trials, "number of trials (seeds 0..t-1) when --seeds is absent");
}

std::vector<std::uint64_t> resolve_seeds(const SeedOptions& opts) {
    if (!opts.seeds_range.empty()) {
        const auto sep = opts.seeds_range.find("..");
        if (sep == std::string::npos) throw CLI::ValidationError("--seeds", "expected a..b");
        const std::uint64_t a = std::stoull(opts.seeds_range.substr(0, sep));
        const std::uint64_t b = std::stoull(opts.seeds_range.substr(sep + 2));
        if (b < a) throw CLI::ValidationError("--seeds", "range must be ascending");
        std::vector<std::uint64_t> seeds;
        for (std::uint64_t x = a; x <= b; ++x) seeds.push_back(x);
        return seeds;
    }
    std::vector<std::uint64_t> seeds(opts.trials);
    for (int i = 0; i < opts.trials; ++i) seeds[i] = static_cast<std::uint64_t>(i);
    return seeds;
}

void apply_model(const ModelOptions& opts, gfc::TrialConfig& config) {
    if (!opts.graph_path.empty()) {
        config.graph_path = opts.graph_path;
        config.labels_path = opts.labels_path;
        config.k = opts.k;
        return;
    }
    int s = opts.s;
    if (s == 0 && opts.n > 0) s = std::max(2, (opts.n + opts.k / 2) / opts.k);
    if (s == 0) throw CLI::ValidationError("--s", "need --s or --n (or --graph)");
    config.model = gfc::SimplifiedSbm(opts.k, s, opts.q, opts.r);
}

void write_records(const std::vector<gfc::TrialRecord>& records, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        gfc::write_csv(records, std::cout);
    } else {
        gfc::write_csv(records, out_path);
    }
}

void dump_filter_csv(const gfc::PolyFilter& filter, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "ell,c,g\n";
    char buf[64];
    for (int l = 0; l <= filter.order; ++l) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", l, filter.coeffs[l], filter.damping[l]);
        out << buf;
    }
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    if (out.empty()) throw std::runtime_error("empty list");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral clustering of stochastic block models via polynomial graph filtering"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "sample a graph and write it as an edge list");
    ModelOptions gen_model;
    std::uint64_t gen_seed = 0;
    std::string gen_out, gen_labels_out;
    add_model_options(gen, gen_model, /*allow_graph=*/false);
    gen->add_option("--seed", gen_seed, "sampling seed");
    gen->add_option("--out", gen_out, "edge-list output path (default stdout)");
    gen->add_option("--labels-out", gen_labels_out, "also write the true block labels");

    // shared clustering options
    ModelOptions model_opts;
    SeedOptions seed_opts;
    gfc::TrialConfig config;
    std::string out_path;
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    double lambda_cut_flag = 0.0;
    int embed_dim_flag = 0;
    std::string dump_spectrum_path, dump_filter_path;

    auto add_common = [&](CLI::App* cmd) {
        add_model_options(cmd, model_opts);
        add_seed_options(cmd, seed_opts);
        cmd->add_option("--kmeans-restarts", config.kmeans_restarts, "k-means restarts");
        cmd->add_option("--kmeans-max-iter", config.kmeans_max_iter, "k-means iteration cap");
        cmd->add_option("--dense-limit", config.dense_limit, "largest n allowed to densify");
        cmd->add_flag("--with-oracle-metrics", config.oracle_metrics,
                      "add spectral filter error and distance-based rates (dense eigendecomposition)");
        cmd->add_flag("--timings", config.timings, "fill the wall_time_ms column (breaks byte-reproducibility)");
        cmd->add_option("--out", out_path, "CSV output path (default stdout)");
        cmd->add_option("--threads", threads, "worker threads for independent trials");
    };
    auto add_compressive = [&](CLI::App* cmd) {
        cmd->add_option("--poly-order", config.poly_order, "polynomial filter order p");
        cmd->add_option("--embed-dim", embed_dim_flag, "embedding dimension d (default max(4k, ceil(4 log n)))");
        cmd->add_option("--epsilon1", config.epsilon1, "distance-preservation epsilon");
        cmd->add_option("--beta", config.beta, "confidence exponent for the dimension rule");
        cmd->add_option("--epsilon2", config.epsilon2, "norm-concentration epsilon");
        cmd->add_option("--bisect-iters", config.bisect_iters, "dichotomic search iterations");
        cmd->add_option("--lambda-cut", lambda_cut_flag, "fixed passband threshold (skips the search)");
    };

    auto* exact = app.add_subcommand("cluster-exact", "spectral clustering through the dense eigendecomposition");
    add_common(exact);
    exact->add_option("--dump-spectrum", dump_spectrum_path, "write the first trial's eigenvalues, one per line");

    auto* compressive = app.add_subcommand("cluster-compressive", "clustering via polynomial graph filtering");
    add_common(compressive);
    add_compressive(compressive);
    compressive->add_option("--dump-filter", dump_filter_path, "write the first trial's filter coefficients as CSV");

    auto* sweepn = app.add_subcommand("sweep-n", "factorial sweep over graph size and filter order");
    std::string n_list_csv = "256,512,1024,2048";
    std::string p_list_csv = "5,25,125";
    add_common(sweepn);
    add_compressive(sweepn);
    sweepn->add_option("--n-list", n_list_csv, "comma-separated graph sizes");
    sweepn->add_option("--p-list", p_list_csv, "comma-separated filter orders");

    auto* sweepp = app.add_subcommand("sweep-poly", "sweep the filter order at fixed graph size");
    int p_from = 5, p_to = 25;
    std::string summary_out;
    add_common(sweepp);
    add_compressive(sweepp);
    sweepp->add_option("--p-from", p_from, "first filter order");
    sweepp->add_option("--p-to", p_to, "last filter order");
    sweepp->add_option("--summary-out", summary_out, "per-order mean CSV (p,e,e_sq,rate)");

    auto* spec = app.add_subcommand("spectrum", "eigenvalues of the normalized Laplacian, one per line");
    ModelOptions spec_model;
    std::uint64_t spec_seed = 0;
    std::string spec_out;
    int spec_dense_limit = gfc::NormalizedLaplacian::kDefaultDenseLimit;
    add_model_options(spec, spec_model);
    spec->add_option("--seed", spec_seed, "sampling seed");
    spec->add_option("--out", spec_out, "output path (default stdout)");
    spec->add_option("--dense-limit", spec_dense_limit, "largest n allowed to densify");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            int s = gen_model.s;
            if (s == 0 && gen_model.n > 0) s = std::max(2, (gen_model.n + gen_model.k / 2) / gen_model.k);
            if (s == 0) throw std::runtime_error("generate: need --s or --n");
            const gfc::SimplifiedSbm model(gen_model.k, s, gen_model.q, gen_model.r);
            const gfc::SparseGraph graph = gfc::sample_adjacency(gfc::build_population(model), gen_seed);
            if (gen_out.empty() || gen_out == "-") {
                gfc::write_edge_list(graph, std::cout, model.k);
            } else {
                gfc::write_edge_list(graph, gen_out, model.k);
            }
            if (!gen_labels_out.empty()) {
                std::ofstream labels(gen_labels_out);
                if (!labels) throw std::runtime_error("cannot open for writing: " + gen_labels_out);
                const gfc::Membership truth = model.membership();
                for (int a : truth.assignments()) labels << a << "\n";
            }
            return 0;
        }

        if (*exact || *compressive) {
            apply_model(model_opts, config);
            if (compressive->count("--embed-dim")) config.embed_dim = embed_dim_flag;
            if (compressive->count("--lambda-cut")) config.lambda_cut = lambda_cut_flag;
            const auto seeds = resolve_seeds(seed_opts);
            std::vector<gfc::TrialRecord> records(seeds.size());
            for (std::size_t i = 0; i < seeds.size(); ++i)
                records[i] = *exact ? gfc::run_exact(config, seeds[i]) : gfc::run_compressive(config, seeds[i]);
            if (*exact && !dump_spectrum_path.empty()) {
                const auto trial = gfc::detail::prepare_trial(config, seeds.front());
                const Eigen::VectorXd values = gfc::eig::spectrum(trial.laplacian, config.dense_limit);
                std::ofstream out(dump_spectrum_path);
                if (!out) throw std::runtime_error("cannot open for writing: " + dump_spectrum_path);
                char buf[48];
                for (int i = 0; i < values.size(); ++i) {
                    std::snprintf(buf, sizeof(buf), "%.17g\n", values[i]);
                    out << buf;
                }
            }
            if (*compressive && !dump_filter_path.empty()) {
                const auto& first = records.front();
                dump_filter_csv(gfc::design_filter(*first.lambda_hat, config.poly_order), dump_filter_path);
            }
            write_records(records, out_path);
            return 0;
        }

        if (*sweepn) {
            apply_model(model_opts, config);
            if (sweepn->count("--embed-dim")) config.embed_dim = embed_dim_flag;
            if (sweepn->count("--lambda-cut")) config.lambda_cut = lambda_cut_flag;
            const auto records =
                gfc::sweep_n(config, parse_int_list(n_list_csv), parse_int_list(p_list_csv), resolve_seeds(seed_opts),
                             std::max(1, threads));
            write_records(records, out_path);
            return 0;
        }

        if (*sweepp) {
            apply_model(model_opts, config);
            if (sweepp->count("--embed-dim")) config.embed_dim = embed_dim_flag;
            if (sweepp->count("--lambda-cut")) config.lambda_cut = lambda_cut_flag;
            const auto records = gfc::sweep_poly(config, p_from, p_to, resolve_seeds(seed_opts), std::max(1, threads));
            if (!summary_out.empty()) {
                std::ofstream out(summary_out);
                if (!out) throw std::runtime_error("cannot open for writing: " + summary_out);
                out << "p,e,e_sq,rate\n";
                char buf[128];
                for (const auto& s : gfc::summarize_poly_sweep(records)) {
                    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g\n", s.p, s.mean_e, s.mean_e_sq, s.mean_rate);
                    out << buf;
                }
            }
            write_records(records, out_path);
            return 0;
        }

        if (*spec) {
            gfc::TrialConfig spec_config;
            apply_model(spec_model, spec_config);
            spec_config.dense_limit = spec_dense_limit;
            const auto trial = gfc::detail::prepare_trial(spec_config, spec_seed);
            const Eigen::VectorXd values = gfc::eig::spectrum(trial.laplacian, spec_dense_limit);
            std::unique_ptr<std::ofstream> file;
            std::ostream* out = &std::cout;
            if (!spec_out.empty() && spec_out != "-") {
                file = std::make_unique<std::ofstream>(spec_out);
                if (!*file) throw std::runtime_error("cannot open for writing: " + spec_out);
                out = file.get();
            }
            char buf[48];
            for (int i = 0; i < values.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.17g\n", values[i]);
                *out << buf;
            }
            return 0;
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
