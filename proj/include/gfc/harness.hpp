// End-to-end pipelines and experiment sweeps: the filtering-based clustering
// run, the exact baseline, factorial sweeps over (n, p), and CSV records.
#pragma once

#include <algorithm>
#include <atomic>
#include <cassert>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gfc/chebyshev.hpp"
#include "gfc/consistency.hpp"
#include "gfc/eig.hpp"
#include "gfc/embed.hpp"
#include "gfc/graph.hpp"
#include "gfc/kmeans.hpp"
#include "gfc/sbm.hpp"

namespace gfc {

/// Everything one trial needs. Either a simplified model (sampled fresh per
/// seed) or an edge-list path with k and optional truth labels.
struct TrialConfig {
    std::optional<SimplifiedSbm> model;
    std::string graph_path;
    std::string labels_path;
    int k = 2; // used when loading a graph; the model carries its own k

    int poly_order = 125;
    std::optional<int> embed_dim; // default: max(4k, ceil(4 log n))
    double epsilon1 = 0.5;
    double beta = 1.0;
    double epsilon2 = 0.5;
    int bisect_iters = 20;
    std::optional<double> lambda_cut; // skips the dichotomic search when set

    int kmeans_restarts = 10;
    int kmeans_max_iter = 300;
    int dense_limit = NormalizedLaplacian::kDefaultDenseLimit;
    bool oracle_metrics = false; // adds spectral error and distance-based rate
    bool timings = false;        // wall_time_ms column stays empty unless set
    int max_resamples = 5;

    int clusters() const { return model ? model->k : k; }
};

inline int default_embed_dim(int n, int k) {
    return std::max(4 * k, static_cast<int>(std::ceil(4.0 * std::log(static_cast<double>(n)))));
}

/// One CSV row. Field order is the column order.
struct TrialRecord {
    std::uint64_t seed = 0;
    int n = 0;
    int k = 0;
    std::optional<double> q;
    std::optional<double> r;
    std::optional<int> p;
    std::optional<int> d;
    std::optional<double> lambda_hat;
    std::optional<double> e; // spectral with oracle metrics, grid surrogate otherwise
    std::optional<double> rate_perm;
    std::optional<double> rate_dist;
    std::optional<double> eq9_bound;
    std::optional<double> wall_time_ms;
    int resamples = 0;
};

inline std::string csv_header() {
    return "seed,n,k,q,r,p,d,lambda_hat,e,rate_perm,rate_dist,eq9_bound,wall_time_ms,resamples";
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); }
inline std::string fmt_opt(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

} // namespace detail

inline std::string csv_row(const TrialRecord& t) {
    std::string row;
    row += std::to_string(t.seed);
    row += ',' + std::to_string(t.n);
    row += ',' + std::to_string(t.k);
    row += ',' + detail::fmt_opt(t.q);
    row += ',' + detail::fmt_opt(t.r);
    row += ',' + detail::fmt_opt(t.p);
    row += ',' + detail::fmt_opt(t.d);
    row += ',' + detail::fmt_opt(t.lambda_hat);
    row += ',' + detail::fmt_opt(t.e);
    row += ',' + detail::fmt_opt(t.rate_perm);
    row += ',' + detail::fmt_opt(t.rate_dist);
    row += ',' + detail::fmt_opt(t.eq9_bound);
    row += ',' + detail::fmt_opt(t.wall_time_ms);
    row += ',' + std::to_string(t.resamples);
    return row;
}

inline void write_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
    out << csv_header() << "\n";
    for (const auto& t : records) out << csv_row(t) << "\n";
}

inline void write_csv(const std::vector<TrialRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(records, out);
}

/// Truth labels: one block index per line, 0-indexed.
inline Membership read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open labels: " + path);
    std::vector<int> labels;
    int value;
    while (in >> value) labels.push_back(value);
    if (labels.empty()) throw std::runtime_error("labels file is empty: " + path);
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    return Membership(std::move(labels), k);
}

namespace detail {

struct PreparedTrial {
    NormalizedLaplacian laplacian;
    std::optional<PopulationAdjacency> population;
    std::optional<Membership> truth;
    int resamples = 0;
};

/// Sample (or load) a graph usable for normalized spectral clustering,
/// redrawing on isolated vertices up to the configured budget.
inline PreparedTrial prepare_trial(const TrialConfig& config, std::uint64_t seed) {
    if (config.model) {
        PopulationAdjacency pop = build_population(*config.model);
        for (int attempt = 0;; ++attempt) {
            try {
                NormalizedLaplacian laplacian(sample_adjacency(pop, seed, static_cast<std::uint64_t>(attempt)));
                return {std::move(laplacian), std::move(pop), config.model->membership(), attempt};
            } catch (const IsolatedVertexError&) {
                if (attempt >= config.max_resamples) throw;
            }
        }
    }
    if (config.graph_path.empty()) throw std::invalid_argument("TrialConfig: needs a model or a graph path");
    NormalizedLaplacian laplacian(read_edge_list(config.graph_path));
    std::optional<Membership> truth;
    if (!config.labels_path.empty()) truth = read_labels(config.labels_path);
    return {std::move(laplacian), std::nullopt, std::move(truth), 0};
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

} // namespace detail

namespace detail {

/// One filtering trial over an already-prepared graph and panel. The caller
/// may pass precomputed eigensystems (a sweep reuses them across orders);
/// absent ones are computed on demand when oracle metrics are requested.
inline TrialRecord compressive_trial(const TrialConfig& config, std::uint64_t seed, const PreparedTrial& trial,
                                     const RandomSignals& signals, const eig::EigenSystem* sample_sys_hint,
                                     const eig::EigenSystem* pop_sys_hint,
                                     std::chrono::steady_clock::time_point start) {
    const NormalizedLaplacian& laplacian = trial.laplacian;
    const int n = laplacian.size();
    const int k = config.clusters();
    const int p = config.poly_order;

    TrialRecord record;
    record.seed = seed;
    record.n = n;
    record.k = k;
    record.p = p;
    record.d = signals.cols();
    record.resamples = trial.resamples;
    if (config.model) {
        record.q = config.model->q;
        record.r = config.model->r;
    }

    const std::uint64_t decompositions_before = eig::decompose_count().load();
    const double lambda_hat =
        config.lambda_cut ? *config.lambda_cut : estimate_lambda_k(laplacian, k, p, signals, config.bisect_iters);
    const PolyFilter filter = design_filter(lambda_hat, p);
    const RowMatrix embedded = fast_filter(laplacian, filter, signals.matrix);
    record.lambda_hat = lambda_hat;

    std::optional<Membership> estimated;
    if (!config.oracle_metrics) {
        estimated = to_membership(kmeans(embedded, k, seed, config.kmeans_restarts, config.kmeans_max_iter));
        record.e = filter_error_grid(filter, lambda_hat);
        assert(eig::decompose_count().load() == decompositions_before && "compressive path must not decompose");
        (void)decompositions_before;
    } else {
        eig::EigenSystem sample_local;
        if (!sample_sys_hint) {
            sample_local = eig::decompose(laplacian, config.dense_limit);
            sample_sys_hint = &sample_local;
        }
        const auto lead = eig::leading(*sample_sys_hint, k);
        record.e = filter_error(filter, sample_sys_hint->eigenvalues, lead.lambda_k);
        if (trial.population) {
            eig::EigenSystem pop_local;
            if (!pop_sys_hint) {
                pop_local = eig::decompose(population_laplacian(*trial.population));
                pop_sys_hint = &pop_local;
            }
            const Embedding chi_r = population_embed(*pop_sys_hint, lead, signals);
            const double competitor_cost = (chi_r.rows - embedded).squaredNorm();
            const KMeansResult clustering = kmeans_certified(embedded, k, seed, competitor_cost,
                                                             config.kmeans_restarts, config.kmeans_max_iter);
            record.rate_dist = miscluster_distance(clustering.assigned_centroids(), chi_r.rows,
                                                   trial.truth->largest_block(), config.epsilon1)
                                   .rate;
            estimated = to_membership(clustering);
        } else {
            estimated = to_membership(kmeans(embedded, k, seed, config.kmeans_restarts, config.kmeans_max_iter));
        }
    }

    if (trial.truth) record.rate_perm = miscluster_permutation(*estimated, *trial.truth).rate;
    record.eq9_bound = eq9_bound(n, k, *record.e);
    if (config.timings) record.wall_time_ms = detail::elapsed_ms(start);
    return record;
}

} // namespace detail

/// The filtering pipeline: estimate |lambda_k|, design the polynomial
/// filter, filter a Gaussian panel, and cluster its rows. No
/// eigendecomposition happens unless oracle metrics are requested.
inline TrialRecord run_compressive(const TrialConfig& config, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    const auto trial = detail::prepare_trial(config, seed);
    const int d = config.embed_dim.value_or(default_embed_dim(trial.laplacian.size(), config.clusters()));
    const RandomSignals signals = draw_signals(trial.laplacian.size(), d, seed);
    return detail::compressive_trial(config, seed, trial, signals, nullptr, nullptr, start);
}

/// The exact baseline: leading-k eigenvectors of the sampled Laplacian, then
/// k-means on their rows. The d column records k (the embedding width).
inline TrialRecord run_exact(const TrialConfig& config, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    auto trial = detail::prepare_trial(config, seed);
    const int n = trial.laplacian.size();
    const int k = config.clusters();

    TrialRecord record;
    record.seed = seed;
    record.n = n;
    record.k = k;
    record.d = k;
    record.resamples = trial.resamples;
    if (config.model) {
        record.q = config.model->q;
        record.r = config.model->r;
    }

    const eig::EigenSystem sys = eig::decompose(trial.laplacian, config.dense_limit);
    const auto lead = eig::leading(sys, k);
    record.lambda_hat = lead.lambda_k;
    const RowMatrix rows = lead.x;
    const KMeansResult clustering = kmeans(rows, k, seed, config.kmeans_restarts, config.kmeans_max_iter);
    const Membership estimated = to_membership(clustering);

    if (trial.truth) record.rate_perm = miscluster_permutation(estimated, *trial.truth).rate;
    if (config.oracle_metrics && trial.population) {
        const eig::EigenSystem pop_sys = eig::decompose(population_laplacian(*trial.population));
        const auto pop_lead = eig::leading(pop_sys, k);
        const Eigen::MatrixXd aligned = pop_lead.x * procrustes(lead.x, pop_lead.x).rotation;
        record.rate_dist =
            miscluster_distance(clustering.assigned_centroids(), aligned, trial.truth->largest_block(), 0.0).rate;
    }
    if (config.timings) record.wall_time_ms = detail::elapsed_ms(start);
    return record;
}

namespace detail {

/// Runs jobs 0..count-1 on the given number of threads; results land in
/// submission order, so emitted CSVs do not depend on scheduling.
inline std::vector<TrialRecord> ordered_parallel(std::size_t count, int threads,
                                                 const std::function<TrialRecord(std::size_t)>& job) {
    std::vector<TrialRecord> results(count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = job(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) results[i] = job(i);
        });
    }
    for (auto& worker : pool) worker.join();
    return results;
}

} // namespace detail

/// Factorial sweep over (n, p, seed) at fixed (k, q, r); block size is
/// rounded so n stays a multiple of k.
inline std::vector<TrialRecord> sweep_n(const TrialConfig& base, const std::vector<int>& n_list,
                                        const std::vector<int>& p_list, const std::vector<std::uint64_t>& seeds,
                                        int threads = 1) {
    if (!base.model) throw std::invalid_argument("sweep_n: requires a simplified model");
    struct Cell {
        TrialConfig config;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (int n : n_list) {
        const int s = std::max(2, (n + base.model->k / 2) / base.model->k);
        for (int p : p_list) {
            TrialConfig config = base;
            config.model = SimplifiedSbm(base.model->k, s, base.model->q, base.model->r);
            config.poly_order = p;
            for (std::uint64_t seed : seeds) cells.push_back({config, seed});
        }
    }
    return detail::ordered_parallel(cells.size(), threads,
                                    [&](std::size_t i) { return run_compressive(cells[i].config, cells[i].seed); });
}

/// Sweep over the polynomial order at fixed (n, k, q, r). A given seed
/// yields the same graph and panel for every order, so the per-seed sample
/// (and, with oracle metrics, its eigendecomposition) is prepared once and
/// shared; the emitted records are identical to per-trial runs.
inline std::vector<TrialRecord> sweep_poly(const TrialConfig& base, int p_from, int p_to,
                                           const std::vector<std::uint64_t>& seeds, int threads = 1) {
    if (!base.model) throw std::invalid_argument("sweep_poly: requires a simplified model");
    if (p_from < 1 || p_to < p_from) throw std::invalid_argument("sweep_poly: bad order range");
    const int orders = p_to - p_from + 1;

    std::optional<eig::EigenSystem> pop_sys;
    if (base.oracle_metrics) pop_sys = eig::decompose(population_laplacian(build_population(*base.model)));

    std::vector<std::vector<TrialRecord>> per_seed(seeds.size());
    const auto seed_job = [&](std::size_t index) {
        const std::uint64_t seed = seeds[index];
        const auto start = std::chrono::steady_clock::now();
        const auto trial = detail::prepare_trial(base, seed);
        const int d = base.embed_dim.value_or(default_embed_dim(trial.laplacian.size(), base.model->k));
        const RandomSignals signals = draw_signals(trial.laplacian.size(), d, seed);
        std::optional<eig::EigenSystem> sample_sys;
        if (base.oracle_metrics) sample_sys = eig::decompose(trial.laplacian, base.dense_limit);
        std::vector<TrialRecord> records;
        records.reserve(orders);
        for (int p = p_from; p <= p_to; ++p) {
            TrialConfig config = base;
            config.poly_order = p;
            records.push_back(detail::compressive_trial(config, seed, trial, signals,
                                                        sample_sys ? &*sample_sys : nullptr,
                                                        pop_sys ? &*pop_sys : nullptr, start));
        }
        return records;
    };
    if (threads <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) per_seed[i] = seed_job(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1))
                    per_seed[i] = seed_job(i);
            });
        for (auto& worker : pool) worker.join();
    }

    // rows in configuration order: p outer, seed inner
    std::vector<TrialRecord> out;
    out.reserve(orders * seeds.size());
    for (int pi = 0; pi < orders; ++pi)
        for (std::size_t si = 0; si < seeds.size(); ++si) out.push_back(per_seed[si][pi]);
    return out;
}

/// Per-order aggregation of a poly sweep: mean filter error, its square, and
/// mean misclustering rate, for the rate-vs-e^2 linearity view.
struct PolySummary {
    int p = 0;
    double mean_e = 0.0;
    double mean_e_sq = 0.0;
    double mean_rate = 0.0;
};

inline std::vector<PolySummary> summarize_poly_sweep(const std::vector<TrialRecord>& records) {
    struct Acc {
        int p;
        int count = 0;
        double e = 0.0, e_sq = 0.0, rate = 0.0;
    };
    std::vector<Acc> acc;
    for (const auto& rec : records) {
        if (!rec.p || !rec.e || !rec.rate_perm) continue;
        auto it = std::find_if(acc.begin(), acc.end(), [&](const Acc& a) { return a.p == *rec.p; });
        if (it == acc.end()) {
            acc.push_back({*rec.p});
            it = acc.end() - 1;
        }
        ++it->count;
        it->e += *rec.e;
        it->e_sq += *rec.e * *rec.e;
        it->rate += *rec.rate_perm;
    }
    std::vector<PolySummary> out;
    out.reserve(acc.size());
    for (const auto& a : acc) out.push_back({a.p, a.e / a.count, a.e_sq / a.count, a.rate / a.count});
    std::sort(out.begin(), out.end(), [](const PolySummary& a, const PolySummary& b) { return a.p < b.p; });
    return out;
}

} // namespace gfc
