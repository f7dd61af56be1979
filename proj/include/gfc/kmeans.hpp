// Lloyd k-means with k-means++ seeding, best-of-restarts, and deterministic
// behavior for a given seed.
#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "gfc/graph.hpp"
#include "gfc/rng.hpp"
#include "gfc/sbm.hpp"

namespace gfc {

struct KMeansResult {
    RowMatrix centroids;         // k x d
    std::vector<int> assignment; // n entries in [0, k)
    double cost = 0.0;           // sum of squared point-to-centroid distances
    std::vector<double> iteration_costs; // Lloyd trace of the winning restart
    int restarts_used = 0;

    int clusters() const { return static_cast<int>(centroids.rows()); }

    /// n x d matrix whose row i is the centroid of i's cluster.
    RowMatrix assigned_centroids() const {
        RowMatrix c(assignment.size(), centroids.cols());
        for (std::size_t i = 0; i < assignment.size(); ++i) c.row(i) = centroids.row(assignment[i]);
        return c;
    }
};

namespace detail {

inline int nearest_centroid(const RowMatrix& points, const RowMatrix& centroids, int i) {
    int best = 0;
    double best_d = (points.row(i) - centroids.row(0)).squaredNorm();
    for (int j = 1; j < centroids.rows(); ++j) {
        const double d = (points.row(i) - centroids.row(j)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

/// Greedy k-means++: each new centroid is drawn from several
/// potential-weighted candidates and the one that lowers the total potential
/// most wins.
inline RowMatrix kmeanspp_init(const RowMatrix& points, int k, rng::Stream& stream) {
    const int n = static_cast<int>(points.rows());
    const int candidates = 2 + static_cast<int>(std::log2(static_cast<double>(k)));
    RowMatrix centroids(k, points.cols());
    centroids.row(0) = points.row(static_cast<int>(stream.below(n)));
    Eigen::VectorXd dist2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int j = 1; j < k; ++j) {
        int best_pick = -1;
        double best_potential = std::numeric_limits<double>::infinity();
        Eigen::VectorXd best_dist2;
        for (int c = 0; c < candidates; ++c) {
            const double total = dist2.sum();
            int pick;
            if (total <= 0.0) {
                pick = static_cast<int>(stream.below(n));
            } else {
                double u = stream.uniform() * total;
                pick = n - 1;
                for (int i = 0; i < n; ++i) {
                    u -= dist2[i];
                    if (u <= 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
            Eigen::VectorXd trial = dist2.cwiseMin((points.rowwise() - points.row(pick)).rowwise().squaredNorm());
            const double potential = trial.sum();
            if (potential < best_potential) {
                best_potential = potential;
                best_pick = pick;
                best_dist2 = std::move(trial);
            }
        }
        centroids.row(j) = points.row(best_pick);
        dist2 = std::move(best_dist2);
    }
    return centroids;
}

/// Hartigan-style polish: move single points between clusters whenever the
/// move lowers the cost even after both centroids shift. Escapes Lloyd fixed
/// points; never empties a cluster.
inline double hartigan_polish(const RowMatrix& points, RowMatrix& centroids, std::vector<int>& assign,
                              std::vector<int>& sizes, double cost) {
    const int n = static_cast<int>(points.rows());
    const int k = static_cast<int>(centroids.rows());
    if (k < 2) return cost;
    for (int pass = 0; pass < 100; ++pass) {
        bool moved = false;
        for (int i = 0; i < n; ++i) {
            const int from = assign[i];
            if (sizes[from] <= 1) continue;
            const double na = static_cast<double>(sizes[from]);
            const double removal_gain = na / (na - 1.0) * (points.row(i) - centroids.row(from)).squaredNorm();
            int best_to = -1;
            double best_delta = -1e-12;
            for (int to = 0; to < k; ++to) {
                if (to == from) continue;
                const double nb = static_cast<double>(sizes[to]);
                const double insertion_cost = nb / (nb + 1.0) * (points.row(i) - centroids.row(to)).squaredNorm();
                const double delta = insertion_cost - removal_gain;
                if (delta < best_delta) {
                    best_delta = delta;
                    best_to = to;
                }
            }
            if (best_to < 0) continue;
            const double na_new = na - 1.0;
            const double nb_new = static_cast<double>(sizes[best_to]) + 1.0;
            centroids.row(from) = (centroids.row(from) * na - points.row(i)) / na_new;
            centroids.row(best_to) = (centroids.row(best_to) * (nb_new - 1.0) + points.row(i)) / nb_new;
            --sizes[from];
            ++sizes[best_to];
            assign[i] = best_to;
            cost += best_delta;
            moved = true;
        }
        if (!moved) break;
    }
    return cost;
}

struct LloydRun {
    RowMatrix centroids;
    std::vector<int> assignment;
    double cost;
    std::vector<double> iteration_costs;
};

inline LloydRun lloyd(const RowMatrix& points, int k, rng::Stream& stream, int max_iter) {
    const int n = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    RowMatrix centroids = kmeanspp_init(points, k, stream);
    std::vector<int> assign(n, 0);
    std::vector<int> sizes(k, 0);
    std::vector<double> costs;
    double prev_cost = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        std::fill(sizes.begin(), sizes.end(), 0);
        for (int i = 0; i < n; ++i) {
            assign[i] = nearest_centroid(points, centroids, i);
            ++sizes[assign[i]];
        }
        // An empty cluster gets its centroid re-seeded at the farthest point,
        // which then joins it; this can only lower the cost.
        for (int j = 0; j < k; ++j) {
            if (sizes[j] != 0) continue;
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (sizes[assign[i]] <= 1) continue;
                const double dd = (points.row(i) - centroids.row(assign[i])).squaredNorm();
                if (dd > far_d) {
                    far_d = dd;
                    far = i;
                }
            }
            if (far < 0) continue; // every cluster is a singleton already
            --sizes[assign[far]];
            assign[far] = j;
            sizes[j] = 1;
            centroids.row(j) = points.row(far);
        }
        double cost = 0.0;
        for (int i = 0; i < n; ++i) cost += (points.row(i) - centroids.row(assign[i])).squaredNorm();
        costs.push_back(cost);

        RowMatrix means = RowMatrix::Zero(k, d);
        for (int i = 0; i < n; ++i) means.row(assign[i]) += points.row(i);
        for (int j = 0; j < k; ++j)
            if (sizes[j] > 0) means.row(j) /= static_cast<double>(sizes[j]);
        centroids = means;

        if (cost == 0.0 || std::abs(prev_cost - cost) <= 1e-10 * std::max(prev_cost, 1e-300)) break;
        prev_cost = cost;
    }

    double polished = 0.0;
    for (int i = 0; i < n; ++i) polished += (points.row(i) - centroids.row(assign[i])).squaredNorm();
    polished = hartigan_polish(points, centroids, assign, sizes, polished);
    (void)polished;

    // Final centroids are the means of the final assignment, so report the
    // cost against them (it is never larger than the last recorded one, up
    // to the incremental-update rounding the polish leaves behind).
    RowMatrix means = RowMatrix::Zero(k, d);
    for (int i = 0; i < n; ++i) means.row(assign[i]) += points.row(i);
    for (int j = 0; j < k; ++j)
        if (sizes[j] > 0) means.row(j) /= static_cast<double>(sizes[j]);
    centroids = means;
    double final_cost = 0.0;
    for (int i = 0; i < n; ++i) final_cost += (points.row(i) - centroids.row(assign[i])).squaredNorm();
    costs.push_back(final_cost);
    return {std::move(centroids), std::move(assign), final_cost, std::move(costs)};
}

} // namespace detail

/// Best-of-restarts Lloyd with k-means++ seeding. Restart r draws from the
/// derived stream (seed, KMeans, r), so results reproduce bit-for-bit and a
/// larger restart budget only extends the candidate set.
inline KMeansResult kmeans(const RowMatrix& points, int k, std::uint64_t seed, int restarts = 10, int max_iter = 300) {
    const int n = static_cast<int>(points.rows());
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (k > n) throw std::invalid_argument("kmeans: k exceeds number of points");
    if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");
    if (!points.allFinite()) throw std::invalid_argument("kmeans: non-finite input");

    KMeansResult best;
    best.cost = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        rng::Stream stream(seed, rng::Purpose::KMeans, static_cast<std::uint64_t>(r));
        auto run = detail::lloyd(points, k, stream, max_iter);
        if (run.cost < best.cost) {
            best.centroids = std::move(run.centroids);
            best.assignment = std::move(run.assignment);
            best.cost = run.cost;
            best.iteration_costs = std::move(run.iteration_costs);
        }
    }
    best.restarts_used = restarts;
    return best;
}

/// Re-runs with a doubled restart budget (up to the cap) until the clustering
/// cost is no worse than the given competitor's. The competitor is any fixed
/// matrix with at most k unique rows, so the optimal clustering always beats
/// it; escalation repairs the rare restart set that does not.
inline KMeansResult kmeans_certified(const RowMatrix& points, int k, std::uint64_t seed, double competitor_cost,
                                     int restarts = 10, int max_iter = 300, int max_restarts = 80) {
    KMeansResult result = kmeans(points, k, seed, restarts, max_iter);
    while (result.cost > competitor_cost && restarts < max_restarts) {
        restarts = std::min(max_restarts, restarts * 2);
        result = kmeans(points, k, seed, restarts, max_iter);
    }
    return result;
}

/// Estimated membership from a clustering; labels are arbitrary up to
/// permutation.
inline Membership to_membership(const KMeansResult& result) {
    return Membership(result.assignment, result.clusters());
}

} // namespace gfc
