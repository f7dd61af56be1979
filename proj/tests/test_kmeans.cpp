#include <catch2/catch_amalgamated.hpp>

#include "gfc/consistency.hpp"
#include "gfc/kmeans.hpp"
#include "gfc/rng.hpp"
#include "oracles.hpp"

using namespace gfc;

namespace {

RowMatrix repeated_sites(const std::vector<Eigen::RowVector2d>& sites, int copies) {
    RowMatrix pts(sites.size() * copies, 2);
    int row = 0;
    for (int c = 0; c < copies; ++c)
        for (const auto& site : sites) pts.row(row++) = site;
    return pts;
}

RowMatrix random_points(int n, int d, std::uint64_t seed) {
    rng::Stream stream(seed, rng::Purpose::Generic);
    RowMatrix pts(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) pts(i, j) = stream.gauss();
    return pts;
}

} // namespace

TEST_CASE("points repeated at k sites cluster at zero cost", "[kmeans]") {
    const RowMatrix pts = repeated_sites({{0.0, 0.0}, {5.0, 5.0}, {-3.0, 4.0}}, 4);
    const KMeansResult result = kmeans(pts, 3, 1);
    REQUIRE(result.cost == Catch::Approx(0.0).margin(1e-20));
    const Membership m = to_membership(result);
    for (int c = 0; c < 4; ++c)
        for (int s = 0; s < 3; ++s) REQUIRE(m.block_of(3 * c + s) == m.block_of(s));
}

TEST_CASE("k=1 returns the coordinate-wise mean and total variance", "[kmeans]") {
    const RowMatrix pts = random_points(40, 3, 7);
    const KMeansResult result = kmeans(pts, 1, 2);
    const Eigen::RowVectorXd mean = pts.colwise().mean();
    REQUIRE((result.centroids.row(0) - mean).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(result.cost == Catch::Approx((pts.rowwise() - mean).squaredNorm()));
}

TEST_CASE("best-of-restarts reaches the exhaustive optimum almost always", "[kmeans]") {
    int optimal = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const RowMatrix pts = random_points(8, 2, 1000 + seed);
        const double best = oracles::best_two_partition_cost(pts);
        const KMeansResult result = kmeans(pts, 2, seed, 10);
        REQUIRE(result.cost >= best - 1e-9);
        if (result.cost <= best + 1e-9) ++optimal;
    }
    REQUIRE(optimal >= 95);
}

TEST_CASE("result invariants hold on random inputs", "[kmeans]") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const int n = 20 + static_cast<int>(seed) * 3;
        const int k = 2 + static_cast<int>(seed % 5);
        const RowMatrix pts = random_points(n, 3, 300 + seed);
        const KMeansResult result = kmeans(pts, k, seed);

        // cost equals ||C - input||_F^2
        REQUIRE(result.cost == Catch::Approx((result.assigned_centroids() - pts).squaredNorm()).margin(1e-10));

        // centroids are the means of their rows (Lloyd fixed point)
        std::vector<int> counts(k, 0);
        RowMatrix sums = RowMatrix::Zero(k, 3);
        for (int i = 0; i < n; ++i) {
            ++counts[result.assignment[i]];
            sums.row(result.assignment[i]) += pts.row(i);
        }
        for (int j = 0; j < k; ++j) {
            REQUIRE(counts[j] >= 1); // no empty clusters
            REQUIRE((result.centroids.row(j) - sums.row(j) / counts[j]).cwiseAbs().maxCoeff() < 1e-8);
        }

        // Lloyd trace is non-increasing
        for (std::size_t t = 1; t < result.iteration_costs.size(); ++t)
            REQUIRE(result.iteration_costs[t] <= result.iteration_costs[t - 1] + 1e-12);

        // valid membership
        const Membership m = to_membership(result);
        REQUIRE(m.blocks() == k);
    }
}

TEST_CASE("well-separated clusters are recovered under row permutation", "[kmeans]") {
    const RowMatrix pts = repeated_sites({{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}}, 6);
    const int n = static_cast<int>(pts.rows());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng::Stream stream(11, rng::Purpose::Generic);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[stream.below(i + 1)]);
    RowMatrix shuffled(n, 2);
    for (int i = 0; i < n; ++i) shuffled.row(i) = pts.row(perm[i]);

    const Membership base = to_membership(kmeans(pts, 3, 5));
    const Membership moved = to_membership(kmeans(shuffled, 3, 5));
    std::vector<int> pulled_back(n);
    for (int i = 0; i < n; ++i) pulled_back[perm[i]] = moved.block_of(i);
    REQUIRE(miscluster_permutation(Membership(pulled_back, 3), base).count == 0);
}

TEST_CASE("argument validation", "[kmeans]") {
    const RowMatrix pts = random_points(4, 2, 1);
    REQUIRE_THROWS_AS(kmeans(pts, 5, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(kmeans(pts, 0, 1), std::invalid_argument);
    RowMatrix bad = pts;
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(kmeans(bad, 2, 1), std::invalid_argument);
}

TEST_CASE("certified clustering beats any fixed competitor with k unique rows", "[kmeans]") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const RowMatrix pts = random_points(30, 4, 40 + seed);
        // competitor: the best constant matrix (k-means with k=1 on each half)
        const RowMatrix competitor = kmeans(pts, 3, seed + 999, 1, 2).assigned_centroids();
        const double competitor_cost = (competitor - pts).squaredNorm();
        const KMeansResult certified = kmeans_certified(pts, 3, seed, competitor_cost, 2);
        REQUIRE(certified.cost <= competitor_cost + 1e-9);
    }
}

TEST_CASE("restart budget only improves the result", "[kmeans]") {
    const RowMatrix pts = random_points(25, 2, 77);
    const double cost_small = kmeans(pts, 4, 3, 2).cost;
    const double cost_large = kmeans(pts, 4, 3, 16).cost;
    REQUIRE(cost_large <= cost_small + 1e-12);
}
