// Dense symmetric eigendecomposition by cyclic Jacobi rotations, the
// leading-k eigenvector matrix, ideal low-pass filtering, and the exact
// spectral clustering baseline. Desk-scale ground truth only: the filtering
// pipeline never calls into this header at production time, and a global
// call counter makes that checkable.
#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gfc/graph.hpp"
#include "gfc/kmeans.hpp"
#include "gfc/sbm.hpp"

namespace gfc::eig {

/// Number of dense eigendecompositions performed so far in this process.
/// The compressive pipeline asserts this stays put while it runs.
inline std::atomic<std::uint64_t>& decompose_count() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}

/// Full spectrum of a symmetric matrix. Eigenvalues are sorted by decreasing
/// absolute value; ties break by decreasing signed value, then by the
/// pre-sort index, so the ordering is deterministic.
struct EigenSystem {
    Eigen::VectorXd eigenvalues;  // n, sorted
    Eigen::MatrixXd eigenvectors; // n x n orthogonal, column i pairs with eigenvalue i
};

/// First k columns of an EigenSystem under the |lambda| sort.
struct LeadingEigenvectors {
    Eigen::MatrixXd x; // n x k
    double lambda_k;   // k-th leading absolute eigenvalue
    bool gap_degenerate = false; // |lambda_k| and |lambda_{k+1}| within 1e-6
};

namespace detail {

/// Cyclic Jacobi sweeps; diagonalizes `a` in place, optionally accumulating
/// the rotations into `v`. Rotations are applied column-wise and mirrored
/// into the rows, keeping the hot loops contiguous in memory.
inline void jacobi_diagonalize(Eigen::MatrixXd& a, Eigen::MatrixXd* v, int max_sweeps = 64) {
    const int n = static_cast<int>(a.rows());
    if (v) {
        v->setIdentity(n, n);
    }
    if (n == 1) return;

    double* pa = a.data();
    double* pv = v ? v->data() : nullptr;
    const std::size_t stride = static_cast<std::size_t>(n);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) off += std::abs(a(p, q));
        if (off <= 1e-11 * scale) return;
        // Entries below the threshold wait for a later sweep; the largest one
        // always clears it, so every sweep makes progress and the tail
        // converges quadratically without full-sweep rotation counts.
        const double thresh = off / (static_cast<double>(n) * n);

        for (int p = 0; p < n - 1; ++p) {
            double* const colp = pa + stride * p;
            for (int q = p + 1; q < n; ++q) {
                double* const colq = pa + stride * q;
                const double apq = colq[p];
                const double g = 100.0 * std::abs(apq);
                // Entries that can no longer move the diagonal are zeroed.
                if (sweep >= 4 && std::abs(colp[p]) + g == std::abs(colp[p]) &&
                    std::abs(colq[q]) + g == std::abs(colq[q])) {
                    colq[p] = colp[q] = 0.0;
                    continue;
                }
                if (std::abs(apq) <= thresh) continue;

                const double app = colp[p];
                const double aqq = colq[q];
                const double h = aqq - app;
                double t;
                if (std::abs(h) + g == std::abs(h)) {
                    t = apq / h;
                } else {
                    const double theta = 0.5 * h / apq;
                    t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // Rotate columns p and q, mirroring each new value into rows
                // p and q in the same pass; the 2x2 block is then fixed
                // exactly.
                for (int i = 0; i < n; ++i) {
                    const double x = colp[i];
                    const double y = colq[i];
                    const double xp = c * x - s * y;
                    const double yq = s * x + c * y;
                    colp[i] = xp;
                    colq[i] = yq;
                    double* const coli = pa + stride * i;
                    coli[p] = xp;
                    coli[q] = yq;
                }
                colp[p] = app - t * apq;
                colq[q] = aqq + t * apq;
                colp[q] = colq[p] = 0.0;

                if (pv) {
                    double* const vp = pv + stride * p;
                    double* const vq = pv + stride * q;
                    for (int i = 0; i < n; ++i) {
                        const double x = vp[i];
                        const double y = vq[i];
                        vp[i] = c * x - s * y;
                        vq[i] = s * x + c * y;
                    }
                }
            }
        }
    }

    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
        for (int q = p + 1; q < n; ++q) off += std::abs(a(p, q));
    if (off > 1e-9 * scale) throw std::runtime_error("jacobi_diagonalize: no convergence");
}

inline void check_symmetric(const Eigen::MatrixXd& m, double tol = 1e-10) {
    if (m.rows() != m.cols()) throw std::invalid_argument("decompose: matrix must be square");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol) throw std::invalid_argument("decompose: matrix asymmetric beyond tolerance");
}

inline std::vector<int> spectral_order(const Eigen::VectorXd& values) {
    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        const double ai = std::abs(values[i]);
        const double aj = std::abs(values[j]);
        if (ai != aj) return ai > aj;
        return values[i] > values[j];
    });
    return order;
}

} // namespace detail

inline EigenSystem decompose(const Eigen::MatrixXd& matrix) {
    detail::check_symmetric(matrix);
    decompose_count().fetch_add(1, std::memory_order_relaxed);
    Eigen::MatrixXd a = 0.5 * (matrix + matrix.transpose());
    Eigen::MatrixXd v;
    detail::jacobi_diagonalize(a, &v);

    const int n = static_cast<int>(a.rows());
    const auto order = detail::spectral_order(a.diagonal());
    EigenSystem sys;
    sys.eigenvalues.resize(n);
    sys.eigenvectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        sys.eigenvalues[i] = a(order[i], order[i]);
        sys.eigenvectors.col(i) = v.col(order[i]);
    }
    return sys;
}

inline EigenSystem decompose(const NormalizedLaplacian& laplacian,
                             int dense_limit = NormalizedLaplacian::kDefaultDenseLimit) {
    return decompose(laplacian.dense(dense_limit));
}

/// Eigenvalues only (same sort), skipping eigenvector accumulation.
inline Eigen::VectorXd spectrum(const Eigen::MatrixXd& matrix) {
    detail::check_symmetric(matrix);
    decompose_count().fetch_add(1, std::memory_order_relaxed);
    Eigen::MatrixXd a = 0.5 * (matrix + matrix.transpose());
    detail::jacobi_diagonalize(a, nullptr);
    const auto order = detail::spectral_order(a.diagonal());
    Eigen::VectorXd values(a.rows());
    for (int i = 0; i < static_cast<int>(order.size()); ++i) values[i] = a(order[i], order[i]);
    return values;
}

inline Eigen::VectorXd spectrum(const NormalizedLaplacian& laplacian,
                                int dense_limit = NormalizedLaplacian::kDefaultDenseLimit) {
    return spectrum(laplacian.dense(dense_limit));
}

inline LeadingEigenvectors leading(const EigenSystem& sys, int k) {
    const int n = static_cast<int>(sys.eigenvalues.size());
    if (k < 1 || k > n) throw std::invalid_argument("leading: k out of range");
    LeadingEigenvectors lead;
    lead.x = sys.eigenvectors.leftCols(k);
    lead.lambda_k = std::abs(sys.eigenvalues[k - 1]);
    if (k < n) lead.gap_degenerate = lead.lambda_k - std::abs(sys.eigenvalues[k]) < 1e-6;
    return lead;
}

/// X X^T R: projection of the signal columns onto the leading-k eigenspace,
/// computed as X (X^T R) so no n x n matrix is formed.
inline RowMatrix ideal_filter_embed(const EigenSystem& sys, int k, const RowMatrix& signals) {
    const auto lead = leading(sys, k);
    if (signals.rows() != lead.x.rows()) throw std::invalid_argument("ideal_filter_embed: row count mismatch");
    return lead.x * (lead.x.transpose() * signals);
}

/// Exact spectral clustering: leading-k eigenvectors of the sampled
/// Laplacian, then k-means on their rows.
inline Membership spectral_cluster_exact(const NormalizedLaplacian& laplacian, int k, std::uint64_t seed,
                                         int restarts = 10, int max_iter = 300,
                                         int dense_limit = NormalizedLaplacian::kDefaultDenseLimit) {
    const EigenSystem sys = decompose(laplacian, dense_limit);
    const auto lead = leading(sys, k);
    RowMatrix rows = lead.x;
    return to_membership(kmeans(rows, k, seed, restarts, max_iter));
}

} // namespace gfc::eig
