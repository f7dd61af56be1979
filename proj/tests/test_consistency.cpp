#include <catch2/catch_amalgamated.hpp>

#include "gfc/consistency.hpp"
#include "gfc/embed.hpp"
#include "gfc/harness.hpp"
#include "gfc/kmeans.hpp"
#include "gfc/rng.hpp"
#include "oracles.hpp"

using namespace gfc;

namespace {

Eigen::MatrixXd random_orthogonal(int k, std::uint64_t seed) {
    rng::Stream stream(seed, rng::Purpose::Generic);
    Eigen::MatrixXd m(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m(i, j) = stream.gauss();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return qr.householderQ();
}

Eigen::MatrixXd random_matrix(int n, int k, std::uint64_t seed) {
    rng::Stream stream(seed, rng::Purpose::Generic);
    Eigen::MatrixXd m(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) m(i, j) = stream.gauss();
    return m;
}

} // namespace

TEST_CASE("procrustes recovers the identity and exact rotations", "[consistency]") {
    const Eigen::MatrixXd chi = random_matrix(20, 3, 1);
    SECTION("aligning a matrix with itself") {
        const auto alignment = procrustes(chi, chi);
        REQUIRE(alignment.residual < 1e-10);
        REQUIRE((alignment.rotation - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("exact rotation recovery") {
        const Eigen::MatrixXd rotation = random_orthogonal(3, 2);
        const auto alignment = procrustes(chi * rotation, chi);
        REQUIRE(alignment.residual < 1e-10);
        REQUIRE((alignment.rotation - rotation).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("procrustes beats fixed competitors", "[consistency]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXd chi = random_matrix(16, 4, 100 + seed);
        const Eigen::MatrixXd x = chi + 0.3 * random_matrix(16, 4, 200 + seed);
        const auto alignment = procrustes(x, chi);
        REQUIRE((alignment.rotation.transpose() * alignment.rotation - Eigen::MatrixXd::Identity(4, 4))
                    .cwiseAbs()
                    .maxCoeff() < 1e-10);
        REQUIRE(alignment.residual <= (x - chi).norm() + 1e-12);
        const Eigen::MatrixXd competitor = random_orthogonal(4, 300 + seed);
        REQUIRE(alignment.residual <= (x - chi * competitor).norm() + 1e-12);
    }
}

TEST_CASE("rank-deficient cross products are flagged but still orthogonal", "[consistency]") {
    Eigen::MatrixXd chi = random_matrix(10, 3, 5);
    chi.col(2).setZero();
    const auto alignment = procrustes(random_matrix(10, 3, 6), chi);
    REQUIRE(alignment.degenerate);
    REQUIRE((alignment.rotation.transpose() * alignment.rotation - Eigen::MatrixXd::Identity(3, 3))
                .cwiseAbs()
                .maxCoeff() < 1e-10);
}

TEST_CASE("distance misclustering counts", "[consistency]") {
    RowMatrix population = RowMatrix::Zero(6, 2);
    SECTION("exact centroids are never misclustered") {
        const auto report = miscluster_distance(population, population, 8, 0.5);
        REQUIRE(report.count == 0);
        REQUIRE(report.rate == 0.0);
    }
    SECTION("the threshold is inclusive") {
        RowMatrix centroids = population;
        // threshold (1 - 0)/sqrt(2 * 8) = 0.25 exactly
        centroids(2, 0) = 0.25;
        const auto exact_hit = miscluster_distance(centroids, population, 8, 0.0);
        REQUIRE(exact_hit.count == 1);
        centroids(2, 0) = 0.2499999;
        REQUIRE(miscluster_distance(centroids, population, 8, 0.0).count == 0);
    }
}

TEST_CASE("permutation misclustering basics", "[consistency]") {
    const Membership truth({0, 0, 1, 1, 2, 2}, 3);
    SECTION("identical labelings") { REQUIRE(miscluster_permutation(truth, truth).count == 0); }
    SECTION("cyclic relabeling is free") {
        const Membership shifted({1, 1, 2, 2, 0, 0}, 3);
        REQUIRE(miscluster_permutation(shifted, truth).count == 0);
    }
    SECTION("one flipped label out of ten") {
        const Membership t10({0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, 2);
        const Membership flipped({0, 0, 0, 0, 1, 1, 1, 1, 1, 1}, 2);
        const auto report = miscluster_permutation(flipped, t10);
        REQUIRE(report.count == 1);
        REQUIRE(report.rate == Catch::Approx(0.1));
    }
    SECTION("invariant under relabeling either argument") {
        const Membership est({2, 2, 0, 1, 0, 1}, 3);
        const Membership est_relabeled({0, 0, 1, 2, 1, 2}, 3);
        const Membership truth_relabeled({2, 2, 0, 0, 1, 1}, 3);
        REQUIRE(miscluster_permutation(est, truth).count == miscluster_permutation(est_relabeled, truth).count);
        REQUIRE(miscluster_permutation(est, truth).count == miscluster_permutation(est, truth_relabeled).count);
    }
    SECTION("fewer estimated labels than true blocks") {
        const Membership coarse({0, 0, 0, 0, 1, 1}, 2);
        REQUIRE(miscluster_permutation(coarse, truth).count == 2);
    }
}

TEST_CASE("simplified quantities match their closed forms and the oracle", "[consistency]") {
    SECTION("k = 2") {
        const auto q = simplified_quantities(SimplifiedSbm(2, 64, 0.3, 0.1));
        REQUIRE(q.lambda_bar == Catch::Approx(0.6));
        REQUIRE(q.tau == Catch::Approx(0.25));
        REQUIRE(q.largest_block == 64);
        REQUIRE(std::abs(q.population_lambda_k - q.lambda_bar) <= 2.0 / 128.0);
    }
    SECTION("k = 4") {
        const auto q = simplified_quantities(SimplifiedSbm(4, 32, 0.3, 0.1));
        REQUIRE(q.lambda_bar == Catch::Approx(3.0 / 7.0));
        REQUIRE(std::abs(q.population_lambda_k - q.lambda_bar) <= 2.0 / 128.0);
    }
    SECTION("disconnected blocks have full gap") {
        const auto q = simplified_quantities(SimplifiedSbm(3, 16, 0.4, 0.0));
        REQUIRE(q.lambda_bar == Catch::Approx(1.0));
        REQUIRE(std::abs(q.population_lambda_k - 1.0) <= 2.0 / 48.0);
    }
    SECTION("q = 0 is rejected") {
        REQUIRE_THROWS_AS(simplified_quantities(SimplifiedSbm(2, 8, 0.0, 0.3)), std::invalid_argument);
    }
}

TEST_CASE("rate bound expression", "[consistency]") {
    SECTION("single cluster, ideal filter") {
        const double n = 100.0;
        REQUIRE(eq9_bound(100, 1, 0.0) == Catch::Approx(std::log(n) * std::log(n) / n));
    }
    SECTION("frozen arithmetic value") {
        REQUIRE(eq9_bound(1000, 4, 0.0) == Catch::Approx(3.053893311635557).epsilon(1e-12));
    }
    SECTION("doubling the error quadruples the second term") {
        const double base = eq9_bound(500, 4, 0.0);
        const double once = eq9_bound(500, 4, 0.01) - base;
        const double twice = eq9_bound(500, 4, 0.02) - base;
        REQUIRE(twice == Catch::Approx(4.0 * once));
    }
}

TEST_CASE("error chain and sufficient condition on pipeline instances", "[consistency][heavy]") {
    // On each trial: if the clustering beats the population competitor, the
    // triangle-inequality chain bounds ||C - Chi_R||^2, and every vertex
    // passing the distance condition is closer to its own block center than
    // to any other.
    SimplifiedSbm model(4, 64, 0.5, 0.05);
    const auto pop = build_population(model);
    const auto pop_sys = eig::decompose(population_laplacian(pop));
    const Membership truth = model.membership();
    const double eps1 = 0.5;
    const int largest = 64;

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        NormalizedLaplacian lap(sample_adjacency(pop, seed));
        const int n = lap.size();
        const int d = default_embed_dim(n, 4);
        const auto signals = draw_signals(n, d, seed);
        const double lambda_hat = estimate_lambda_k(lap, 4, 125, signals);
        const PolyFilter filter = design_filter(lambda_hat, 125);
        const RowMatrix approx = fast_filter(lap, filter, signals.matrix);

        const auto sys = eig::decompose(lap);
        const auto lead = eig::leading(sys, 4);
        const RowMatrix exact = eig::ideal_filter_embed(sys, 4, signals.matrix);
        const Embedding chi_r = population_embed(pop_sys, lead, signals);

        const double competitor_cost = (chi_r.rows - approx).squaredNorm();
        const KMeansResult clustering = kmeans_certified(approx, 4, seed, competitor_cost);
        REQUIRE(clustering.cost <= competitor_cost + 1e-9);

        const RowMatrix centroids = clustering.assigned_centroids();
        const double lhs = (centroids - chi_r.rows).squaredNorm();
        const double rhs = 4.0 * (chi_r.rows - exact).squaredNorm() + 4.0 * (exact - approx).squaredNorm();
        REQUIRE(lhs <= rhs + 1e-9);

        const double threshold = (1.0 - eps1) / std::sqrt(2.0 * largest);
        for (int i = 0; i < n; ++i) {
            if ((centroids.row(i) - chi_r.rows.row(i)).norm() >= threshold) continue;
            const double own = (centroids.row(i) - chi_r.rows.row(i)).norm();
            for (int g = 0; g < 4; ++g) {
                if (g == truth.block_of(i)) continue;
                const double other = (centroids.row(i) - chi_r.rows.row(g * 64)).norm();
                REQUIRE(own < other);
            }
        }
    }
}

TEST_CASE("strong-signal pipeline keeps the distance rate tiny", "[consistency][heavy]") {
    SimplifiedSbm model(4, 128, 0.5, 0.05);
    TrialConfig config;
    config.model = model;
    config.poly_order = 125;
    config.oracle_metrics = true;
    std::vector<double> rates;
    for (std::uint64_t seed = 0; seed < 6; ++seed) rates.push_back(*run_compressive(config, seed).rate_dist);
    REQUIRE(oracles::median(rates) <= 0.02);
}

TEST_CASE("growing models keep the permutation rate from rising", "[consistency][heavy]") {
    // k grows like n^(1/4), inside the weak-consistency regime.
    std::vector<double> medians;
    for (int n_target : {256, 1024, 4096}) {
        const int k = static_cast<int>(std::ceil(std::pow(n_target, 0.25)));
        const int s = std::max(2, (n_target + k / 2) / k);
        TrialConfig config;
        config.model = SimplifiedSbm(k, s, 0.5, 0.05);
        config.poly_order = 125;
        config.bisect_iters = 12;
        std::vector<double> rates;
        for (std::uint64_t seed = 0; seed < 3; ++seed) rates.push_back(*run_compressive(config, seed).rate_perm);
        medians.push_back(oracles::median(rates));
    }
    REQUIRE(medians[1] <= medians[0] + 1e-12);
    REQUIRE(medians[2] <= medians[1] + 1e-12);
}
