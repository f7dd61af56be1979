// Compressed spectral embeddings: Gaussian signal panels, the
// Johnson-Lindenstrauss dimension rule, exact/population embeddings, the
// eigendecomposition-free estimate of |lambda_k| by dichotomic search, and
// the concentration check on the filtered panel norm.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gfc/chebyshev.hpp"
#include "gfc/consistency.hpp"
#include "gfc/eig.hpp"
#include "gfc/graph.hpp"
#include "gfc/rng.hpp"

namespace gfc {

struct NonConvergentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// i.i.d. Gaussian panel R with mean 0 and variance 1/d per entry,
/// reproducible from the seed. Entries are drawn row-major via Box-Muller
/// from the stream (seed, Signals).
struct RandomSignals {
    RowMatrix matrix;
    std::uint64_t seed = 0;

    int rows() const { return static_cast<int>(matrix.rows()); }
    int cols() const { return static_cast<int>(matrix.cols()); }
};

inline RandomSignals draw_signals(int n, int d, std::uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("draw_signals: n and d must be >= 1");
    rng::Stream stream(seed, rng::Purpose::Signals);
    RandomSignals signals;
    signals.seed = seed;
    signals.matrix.resize(n, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    double* ptr = signals.matrix.data();
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n) * d; ++i) ptr[i] = scale * stream.gauss();
    return signals;
}

struct JlParams {
    double epsilon1 = 0.0;
    double beta = 0.0;
    int d = 0;
};

/// Smallest integer d with d > (4 + 2 beta) / (eps^2/2 - eps^3/3) * log_term.
inline int jl_min_dimension(double log_term, double epsilon1, double beta) {
    if (!(epsilon1 > 0.0 && epsilon1 <= 1.0)) throw std::invalid_argument("jl_min_dimension: epsilon1 in (0,1]");
    if (!(beta > 0.0)) throw std::invalid_argument("jl_min_dimension: beta > 0");
    // eps^2/2 - eps^3/3 written as eps^2 (3 - 2 eps) / 6, which is exact at
    // the eps = 1 boundary.
    const double denom = epsilon1 * epsilon1 * (3.0 - 2.0 * epsilon1) / 6.0;
    const double bound = (4.0 + 2.0 * beta) / denom * log_term;
    return static_cast<int>(std::floor(bound)) + 1;
}

inline JlParams choose_dimension(int n, int k, double epsilon1, double beta) {
    JlParams params;
    params.epsilon1 = epsilon1;
    params.beta = beta;
    params.d = jl_min_dimension(std::log(static_cast<double>(n) + k), epsilon1, beta);
    return params;
}

enum class EmbeddingKind { Exact, Approximate, Population };

struct EmbeddingProvenance {
    std::uint64_t seed = 0;
    int filter_order = -1; // -1 = ideal filter
    int k = 0;
    int d = 0;
};

/// n x d row-wise embedding: exact X R-projection, fast-filter approximation,
/// or the aligned population version.
struct Embedding {
    RowMatrix rows;
    EmbeddingKind kind = EmbeddingKind::Exact;
    EmbeddingProvenance provenance;
};

/// X X^T R through the dense oracle (testing baseline).
inline Embedding exact_embed(const eig::EigenSystem& sys, int k, const RandomSignals& signals) {
    Embedding e;
    e.rows = eig::ideal_filter_embed(sys, k, signals.matrix);
    e.kind = EmbeddingKind::Exact;
    e.provenance = {signals.seed, -1, k, signals.cols()};
    return e;
}

/// Fast-filtered panel as an Embedding record.
inline Embedding approximate_embed(const NormalizedLaplacian& laplacian, const PolyFilter& filter,
                                   const RandomSignals& signals) {
    Embedding e;
    e.rows = fast_filter(laplacian, filter, signals.matrix);
    e.kind = EmbeddingKind::Approximate;
    e.provenance = {signals.seed, filter.order, 0, signals.cols()};
    return e;
}

/// Population embedding Chi O X^T R, where O is the orthogonal Procrustes
/// alignment of the sample eigenvectors onto the population ones (the
/// computable surrogate for the alignment the theory posits). Its rows are
/// constant within each true block.
inline Embedding population_embed(const eig::EigenSystem& population_sys, const eig::LeadingEigenvectors& sample_lead,
                                  const RandomSignals& signals) {
    const int k = static_cast<int>(sample_lead.x.cols());
    const auto population_lead = eig::leading(population_sys, k);
    if (sample_lead.x.rows() != population_lead.x.rows() || signals.rows() != sample_lead.x.rows())
        throw std::invalid_argument("population_embed: dimension mismatch");
    const Eigen::MatrixXd rotation = procrustes(sample_lead.x, population_lead.x).rotation;
    Embedding e;
    e.rows = population_lead.x * (rotation * (sample_lead.x.transpose() * signals.matrix));
    e.kind = EmbeddingKind::Population;
    e.provenance = {signals.seed, -1, k, signals.cols()};
    return e;
}

namespace detail {

struct LambdaProbe {
    double lambda;
    double nu; // ||fast_filter(L, filter_at_lambda, R)||_F^2
};

/// The probes reuse one panel R, so nu should fall as lambda grows; a
/// non-monotone tail means the filter order cannot resolve the gap.
inline bool probes_monotone(const std::vector<LambdaProbe>& probes, double slack) {
    if (probes.size() < 3) return true;
    std::vector<LambdaProbe> tail(probes.end() - 3, probes.end());
    std::sort(tail.begin(), tail.end(), [](const LambdaProbe& a, const LambdaProbe& b) { return a.lambda < b.lambda; });
    return tail[0].nu + slack >= tail[1].nu && tail[1].nu + slack >= tail[2].nu;
}

} // namespace detail

/// Dichotomic search for |lambda_k| on (0, 1]: probe a threshold, filter the
/// panel, and compare the filtered energy against k. With variance-1/d
/// signals the energy of the filtered panel concentrates on the number of
/// modes inside the passband, so the search settles inside the spectral gap
/// below |lambda_k|. Needs only operator applications; no eigendecomposition
/// is reachable from here.
inline double estimate_lambda_k(const NormalizedLaplacian& laplacian, int k, int p, const RandomSignals& signals,
                                int iters = 20) {
    if (k < 1 || k >= laplacian.size() + 1) throw std::invalid_argument("estimate_lambda_k: k out of range");
    if (iters < 1) throw std::invalid_argument("estimate_lambda_k: iters must be >= 1");
    double lo = 0.0;
    double hi = 1.0;
    std::vector<detail::LambdaProbe> probes;
    probes.reserve(iters);
    for (int it = 0; it < iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        const PolyFilter filter = design_filter(mid, p);
        const double nu = fast_filter(laplacian, filter, signals.matrix).squaredNorm();
        probes.push_back({mid, nu});
        if (nu < static_cast<double>(k)) {
            hi = mid; // too few modes pass: lower the threshold
        } else {
            lo = mid;
        }
    }
    if (!detail::probes_monotone(probes, 1e-9 * std::max(1.0, static_cast<double>(k))))
        throw NonConvergentError("estimate_lambda_k: energy probes non-monotone near the cut; raise the filter order");
    return 0.5 * (lo + hi);
}

inline double estimate_lambda_k(const NormalizedLaplacian& laplacian, int k, int p, int d, std::uint64_t seed,
                                int iters = 20) {
    return estimate_lambda_k(laplacian, k, p, draw_signals(laplacian.size(), d, seed), iters);
}

/// Two-sided concentration interval for ||X~_R||_F^2 around k; the lower end
/// clamps at zero where the bound goes vacuous. (The filtered energy of a
/// variance-1/d panel concentrates on the passband mode count itself.)
inline bool norm_bounds_check(const RowMatrix& approx_embedding, int k, double filter_err, double epsilon2) {
    const double n = static_cast<double>(approx_embedding.rows());
    const double nu = approx_embedding.squaredNorm();
    const double kd = static_cast<double>(k);
    const double lower = std::max(0.0, (1.0 - epsilon2) * kd - 2.0 * (1.0 + epsilon2) * kd * filter_err);
    const double upper = (1.0 + epsilon2) * (kd + 2.0 * kd * filter_err + n * filter_err * filter_err);
    return lower <= nu && nu <= upper;
}

} // namespace gfc
