// Misclustering measurement and the theoretical quantities it is compared
// against: orthogonal Procrustes alignment, distance- and permutation-based
// miscluster counts, closed-form eigengap/sparsity values for the simplified
// model, and the misclustering-rate bound expression.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <vector>

#include "gfc/eig.hpp"
#include "gfc/sbm.hpp"

namespace gfc {

struct ProcrustesAlignment {
    Eigen::MatrixXd rotation; // k x k orthonormal
    double residual = 0.0;    // ||X - Chi * O||_F at the optimum
    bool degenerate = false;  // cross-product was rank deficient
};

/// Closed-form orthogonal Procrustes: O = argmin ||X - Chi O||_F over
/// orthogonal O, from the SVD of Chi^T X. A rank-deficient cross product
/// still yields a valid orthogonal matrix but is flagged.
inline ProcrustesAlignment procrustes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& chi) {
    if (x.rows() != chi.rows() || x.cols() != chi.cols()) throw std::invalid_argument("procrustes: shape mismatch");
    if (x.cols() > x.rows()) throw std::invalid_argument("procrustes: need k <= n");
    const Eigen::MatrixXd m = chi.transpose() * x;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ProcrustesAlignment out;
    out.rotation = svd.matrixU() * svd.matrixV().transpose();
    out.residual = (x - chi * out.rotation).norm();
    const auto& sv = svd.singularValues();
    out.degenerate = sv(sv.size() - 1) <= 1e-12 * std::max(sv(0), 1e-300);
    return out;
}

struct MisclusterReport {
    enum class Definition { Distance, Permutation };
    int count = 0;
    double rate = 0.0;
    Definition definition = Definition::Distance;
    int largest_block = 0;
    double epsilon1 = 0.0;
};

/// Vertices whose k-means centroid sits at least (1 - eps1)/sqrt(2P) away
/// from their population embedding row (inclusive threshold).
inline MisclusterReport miscluster_distance(const RowMatrix& row_centroids, const RowMatrix& population_rows,
                                            int largest_block, double epsilon1) {
    if (row_centroids.rows() != population_rows.rows() || row_centroids.cols() != population_rows.cols())
        throw std::invalid_argument("miscluster_distance: shape mismatch");
    const double threshold = (1.0 - epsilon1) / std::sqrt(2.0 * largest_block);
    MisclusterReport report;
    report.definition = MisclusterReport::Definition::Distance;
    report.largest_block = largest_block;
    report.epsilon1 = epsilon1;
    const int n = static_cast<int>(row_centroids.rows());
    for (int i = 0; i < n; ++i)
        if ((row_centroids.row(i) - population_rows.row(i)).norm() >= threshold) ++report.count;
    report.rate = static_cast<double>(report.count) / n;
    return report;
}

namespace detail {

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// algorithm with potentials, O(k^3)). Returns row -> column.
inline std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

} // namespace detail

/// Minimum Hamming distance between two labelings over all label
/// permutations, found by optimal assignment on the confusion matrix.
/// Usable without any population quantities.
inline MisclusterReport miscluster_permutation(const Membership& estimated, const Membership& truth) {
    if (estimated.size() != truth.size()) throw std::invalid_argument("miscluster_permutation: size mismatch");
    const int n = truth.size();
    const int k = std::max(estimated.blocks(), truth.blocks());
    Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < n; ++i) confusion(estimated.block_of(i), truth.block_of(i)) += 1.0;
    const auto assignment = detail::min_cost_assignment(-confusion);
    double agree = 0.0;
    for (int g = 0; g < k; ++g) agree += confusion(g, assignment[g]);
    MisclusterReport report;
    report.definition = MisclusterReport::Definition::Permutation;
    report.largest_block = truth.largest_block();
    report.count = n - static_cast<int>(std::llround(agree));
    report.rate = static_cast<double>(report.count) / n;
    return report;
}

/// Closed-form quantities for the simplified model, with the population
/// eigengap cross-checked against the dense oracle when the model is small
/// enough to decompose.
struct SimplifiedQuantities {
    double lambda_bar = 0.0;  // 1 / (k (r/q) + 1)
    double tau = 0.0;         // q/k + r
    int largest_block = 0;    // s
    double population_lambda_k = std::numeric_limits<double>::quiet_NaN(); // oracle cross-check
};

inline SimplifiedQuantities simplified_quantities(const SimplifiedSbm& model, int population_check_limit = 512) {
    if (model.q <= 0.0)
        throw std::invalid_argument("simplified_quantities: eigengap formula undefined at q = 0; use the dense oracle");
    SimplifiedQuantities out;
    out.lambda_bar = 1.0 / (model.k * (model.r / model.q) + 1.0);
    out.tau = model.q / model.k + model.r;
    out.largest_block = model.s;
    if (model.n() <= population_check_limit) {
        const Eigen::VectorXd values = eig::spectrum(population_laplacian(build_population(model)));
        out.population_lambda_k = std::abs(values[model.k - 1]);
    }
    return out;
}

/// The misclustering-rate expression k^3 (log n)^2 / n + n^2 e^2 / k
/// (natural log, no constant claimed); reported next to observed rates.
inline double eq9_bound(int n, int k, double e) {
    const double logn = std::log(static_cast<double>(n));
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    return kd * kd * kd * logn * logn / nd + nd * nd * e * e / kd;
}

} // namespace gfc
