// Independent reference computations used by the tests. Everything here goes
// through a different code path than the implementation it checks: dense
// spectral application instead of the operator recurrence, exhaustive
// enumeration instead of Lloyd iterations, direct label walks instead of
// clustering.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <queue>
#include <vector>

#include "gfc/chebyshev.hpp"
#include "gfc/eig.hpp"
#include "gfc/graph.hpp"

namespace oracles {

/// U f(Lambda) U^T R evaluated densely from a full eigendecomposition; the
/// scalar function is applied pointwise on the spectrum.
template <typename Fn>
Eigen::MatrixXd dense_spectral_apply(const gfc::eig::EigenSystem& sys, Fn&& f, const Eigen::MatrixXd& signals) {
    Eigen::VectorXd diag(sys.eigenvalues.size());
    for (int i = 0; i < diag.size(); ++i) diag[i] = f(sys.eigenvalues[i]);
    return sys.eigenvectors * (diag.asDiagonal() * (sys.eigenvectors.transpose() * signals));
}

/// Connected components by breadth-first search.
inline std::vector<int> connected_components(const gfc::SparseGraph& g) {
    std::vector<int> label(g.size(), -1);
    int next = 0;
    for (int start = 0; start < g.size(); ++start) {
        if (label[start] >= 0) continue;
        std::queue<int> frontier;
        frontier.push(start);
        label[start] = next;
        while (!frontier.empty()) {
            const int u = frontier.front();
            frontier.pop();
            auto [b, e] = g.neighbors(u);
            for (const int* it = b; it != e; ++it)
                if (label[*it] < 0) {
                    label[*it] = next;
                    frontier.push(*it);
                }
        }
        ++next;
    }
    return label;
}

/// Exhaustive k=2 partition optimum: best sum of squared distances to
/// cluster means over all 2^n two-block assignments with no empty block.
inline double best_two_partition_cost(const Eigen::MatrixXd& points) {
    const int n = static_cast<int>(points.rows());
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        Eigen::RowVectorXd mean0 = Eigen::RowVectorXd::Zero(points.cols());
        Eigen::RowVectorXd mean1 = Eigen::RowVectorXd::Zero(points.cols());
        int n1 = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                mean1 += points.row(i);
                ++n1;
            } else {
                mean0 += points.row(i);
            }
        mean0 /= static_cast<double>(n - n1);
        mean1 /= static_cast<double>(n1);
        double cost = 0.0;
        for (int i = 0; i < n; ++i)
            cost += (points.row(i) - ((mask & (1u << i)) ? mean1 : mean0)).squaredNorm();
        best = std::min(best, cost);
    }
    return best;
}

/// Two-sided quantile interval of Binomial(trials, p)/trials under the
/// normal approximation with continuity correction; adequate for the
/// trial counts used here (millions of Bernoulli draws).
struct Interval {
    double lo, hi;
};

inline Interval binomial_proportion_interval(std::int64_t trials, double p, double z = 2.5758293035489004) {
    const double mean = trials * p;
    const double sd = std::sqrt(trials * p * (1.0 - p));
    const double lo = (mean - z * sd - 0.5) / trials;
    const double hi = (mean + z * sd + 0.5) / trials;
    return {lo, hi};
}

/// Count of spectrum entries with |lambda| >= threshold.
inline int eigencount(const Eigen::VectorXd& spectrum, double threshold) {
    int count = 0;
    for (int i = 0; i < spectrum.size(); ++i)
        if (std::abs(spectrum[i]) >= threshold) ++count;
    return count;
}

/// Median of a copy of the values.
inline double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Pearson correlation.
inline double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

} // namespace oracles
