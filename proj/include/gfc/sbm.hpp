// Stochastic block models: membership, block matrix, the four-parameter
// simplified model, population adjacency, and Bernoulli sampling.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gfc/graph.hpp"
#include "gfc/rng.hpp"

namespace gfc {

/// Block assignment for n vertices: entry i is the block of vertex i,
/// in [0, k). Every block must be populated.
class Membership {
public:
    Membership(std::vector<int> assignments, int k) : assign_(std::move(assignments)), k_(k) {
        if (k_ < 1) throw std::invalid_argument("Membership: k must be >= 1");
        if (assign_.empty()) throw std::invalid_argument("Membership: empty assignment");
        std::vector<int> seen(k_, 0);
        for (int a : assign_) {
            if (a < 0 || a >= k_) throw std::invalid_argument("Membership: block index out of range");
            seen[a] = 1;
        }
        for (int g = 0; g < k_; ++g)
            if (!seen[g]) throw std::invalid_argument("Membership: block " + std::to_string(g) + " is empty");
    }

    /// Equal blocks of the given size, vertices ordered by block.
    static Membership equal_blocks(int k, int block_size) {
        std::vector<int> a(static_cast<std::size_t>(k) * block_size);
        for (int i = 0; i < static_cast<int>(a.size()); ++i) a[i] = i / block_size;
        return Membership(std::move(a), k);
    }

    int size() const { return static_cast<int>(assign_.size()); }
    int blocks() const { return k_; }
    int block_of(int i) const { return assign_[i]; }
    const std::vector<int>& assignments() const { return assign_; }

    std::vector<int> block_sizes() const {
        std::vector<int> s(k_, 0);
        for (int a : assign_) ++s[a];
        return s;
    }

    int largest_block() const {
        auto s = block_sizes();
        return *std::max_element(s.begin(), s.end());
    }

    /// One-hot matrix Z with exactly one 1 per row.
    Eigen::MatrixXd one_hot() const {
        Eigen::MatrixXd z = Eigen::MatrixXd::Zero(size(), k_);
        for (int i = 0; i < size(); ++i) z(i, assign_[i]) = 1.0;
        return z;
    }

private:
    std::vector<int> assign_;
    int k_;
};

/// Symmetric k x k matrix of inter-block edge probabilities; must be full
/// rank (relative singular-value threshold 1e-12).
class BlockMatrix {
public:
    explicit BlockMatrix(Eigen::MatrixXd entries) : b_(std::move(entries)) {
        const int k = static_cast<int>(b_.rows());
        if (k < 1 || b_.cols() != k) throw std::invalid_argument("BlockMatrix: must be square");
        for (int g = 0; g < k; ++g)
            for (int h = 0; h < k; ++h) {
                if (b_(g, h) < 0.0 || b_(g, h) > 1.0) throw std::invalid_argument("BlockMatrix: entries must be in [0,1]");
                if (std::abs(b_(g, h) - b_(h, g)) > 0.0) throw std::invalid_argument("BlockMatrix: must be symmetric");
            }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(b_);
        const auto& sv = svd.singularValues();
        if (sv(0) <= 0.0 || sv(k - 1) <= 1e-12 * sv(0)) throw std::invalid_argument("BlockMatrix: rank deficient");
    }

    int blocks() const { return static_cast<int>(b_.rows()); }
    double operator()(int g, int h) const { return b_(g, h); }
    const Eigen::MatrixXd& matrix() const { return b_; }

private:
    Eigen::MatrixXd b_;
};

/// Four-parameter model: k equal blocks of s vertices, within-block edge
/// probability q+r, cross-block probability r. n = k*s.
struct SimplifiedSbm {
    int k;
    int s;
    double q;
    double r;

    SimplifiedSbm(int k_, int s_, double q_, double r_) : k(k_), s(s_), q(q_), r(r_) {
        if (k < 1) throw std::invalid_argument("SimplifiedSbm: k must be >= 1");
        if (s < 2) throw std::invalid_argument("SimplifiedSbm: s must be >= 2");
        if (r < 0.0 || r > 1.0) throw std::invalid_argument("SimplifiedSbm: r must be in [0,1]");
        if (q < 0.0 || q + r > 1.0) throw std::invalid_argument("SimplifiedSbm: q+r must be in [0,1]");
    }

    int n() const { return k * s; }

    BlockMatrix block_matrix() const {
        Eigen::MatrixXd b = Eigen::MatrixXd::Constant(k, k, r);
        b.diagonal().array() += q;
        return BlockMatrix(std::move(b));
    }

    Membership membership() const { return Membership::equal_blocks(k, s); }
};

/// Dense matrix of edge probabilities ZBZ^T with forced-zero diagonal.
struct PopulationAdjacency {
    Eigen::MatrixXd probs;

    int size() const { return static_cast<int>(probs.rows()); }

    Eigen::VectorXd expected_degrees() const { return probs.rowwise().sum(); }
};

inline PopulationAdjacency build_population(const Membership& membership, const BlockMatrix& blocks) {
    if (membership.blocks() != blocks.blocks())
        throw std::invalid_argument("build_population: membership and block matrix disagree on k");
    const int n = membership.size();
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) w(i, j) = blocks(membership.block_of(i), membership.block_of(j));
        w(i, i) = 0.0;
    }
    return {std::move(w)};
}

inline PopulationAdjacency build_population(const SimplifiedSbm& model) {
    return build_population(model.membership(), model.block_matrix());
}

/// Population normalized Laplacian, dense. Requires positive expected degrees.
inline Eigen::MatrixXd population_laplacian(const PopulationAdjacency& pop) {
    const Eigen::VectorXd deg = pop.expected_degrees();
    if (deg.minCoeff() <= 0.0) throw std::invalid_argument("population_laplacian: zero expected degree");
    const Eigen::VectorXd s = deg.array().rsqrt();
    return s.asDiagonal() * pop.probs * s.asDiagonal();
}

inline SparsityStats tau(const PopulationAdjacency& pop) { return tau_from_degrees(pop.expected_degrees()); }

/// Samples each upper-triangular entry as an independent Bernoulli draw and
/// mirrors it, so the adjacency is symmetric with zero diagonal by
/// construction. Deterministic given (seed, attempt); the attempt index lets
/// a caller redraw after an unusable sample without touching other streams.
inline SparseGraph sample_adjacency(const PopulationAdjacency& pop, std::uint64_t seed, std::uint64_t attempt = 0) {
    const int n = pop.size();
    rng::Stream stream(seed, rng::Purpose::SampleGraph, attempt);
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(pop.probs.sum() / 2.0 * 1.1) + 16);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (stream.uniform() < pop.probs(i, j)) edges.emplace_back(i, j);
    return SparseGraph::from_edges(n, std::move(edges));
}

/// Edge-list text format: optional "# n=<n> k=<k>" header, then one "u v"
/// pair per line with u < v, 0-indexed, newline-terminated.
inline void write_edge_list(const SparseGraph& g, std::ostream& out, int k = 0) {
    out << "# n=" << g.size() << " k=" << k << "\n";
    for (auto [u, v] : g.edges()) out << u << " " << v << "\n";
}

inline void write_edge_list(const SparseGraph& g, const std::string& path, int k = 0) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_edge_list(g, out, k);
}

inline SparseGraph read_edge_list(std::istream& in) {
    std::vector<std::pair<int, int>> edges;
    int max_vertex = -1;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int u = -1, v = -1;
        if (!(ls >> u >> v)) throw std::runtime_error("edge list: malformed line: " + line);
        if (u >= v || u < 0) throw std::runtime_error("edge list: expected 0 <= u < v, got: " + line);
        edges.emplace_back(u, v);
        max_vertex = std::max(max_vertex, v);
    }
    if (max_vertex < 0) throw std::runtime_error("edge list: no edges");
    return SparseGraph::from_edges(max_vertex + 1, std::move(edges));
}

inline SparseGraph read_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);
    return read_edge_list(in);
}

} // namespace gfc
