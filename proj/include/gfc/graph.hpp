// Sparse symmetric 0/1 graphs in CSR form, the normalized Laplacian as a
// matrix-free operator, and the sparsity statistic tau.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gfc {

/// Row-major dense panel; signal blocks are stored this way so a CSR sweep
/// touches each row contiguously.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct IsolatedVertexError : std::runtime_error {
    explicit IsolatedVertexError(int v)
        : std::runtime_error("vertex " + std::to_string(v) + " has degree 0; the normalized Laplacian is undefined"),
          vertex(v) {}
    int vertex;
};

/// Undirected simple graph: symmetric 0/1 adjacency with zero diagonal,
/// stored as row offsets + column indices (both directions of every edge).
class SparseGraph {
public:
    SparseGraph() = default;

    /// Build from a list of undirected edges (u, v) with u != v. Duplicates
    /// are merged; both orientations are stored.
    static SparseGraph from_edges(int n, std::vector<std::pair<int, int>> edges) {
        if (n < 1) throw std::invalid_argument("SparseGraph: n must be positive");
        for (auto& [u, v] : edges) {
            if (u == v) throw std::invalid_argument("SparseGraph: self loop");
            if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("SparseGraph: vertex out of range");
            if (u > v) std::swap(u, v);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        SparseGraph g;
        g.n_ = n;
        std::vector<int> deg(n, 0);
        for (auto [u, v] : edges) {
            ++deg[u];
            ++deg[v];
        }
        g.offsets_.assign(n + 1, 0);
        for (int i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i];
        g.cols_.resize(g.offsets_[n]);
        std::vector<int> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
        for (auto [u, v] : edges) {
            g.cols_[cursor[u]++] = v;
            g.cols_[cursor[v]++] = u;
        }
        for (int i = 0; i < n; ++i)
            std::sort(g.cols_.begin() + g.offsets_[i], g.cols_.begin() + g.offsets_[i + 1]);
        return g;
    }

    int size() const { return n_; }
    std::int64_t edge_count() const { return static_cast<std::int64_t>(cols_.size()) / 2; }

    int degree(int i) const { return offsets_[i + 1] - offsets_[i]; }
    int min_degree() const {
        int m = n_;
        for (int i = 0; i < n_; ++i) m = std::min(m, degree(i));
        return m;
    }

    /// Neighbors of i, sorted ascending.
    std::pair<const int*, const int*> neighbors(int i) const {
        return {cols_.data() + offsets_[i], cols_.data() + offsets_[i + 1]};
    }

    bool has_edge(int u, int v) const {
        auto [b, e] = neighbors(u);
        return std::binary_search(b, e, v);
    }

    /// Undirected edges as (u, v) with u < v, sorted.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        out.reserve(cols_.size() / 2);
        for (int u = 0; u < n_; ++u)
            for (int idx = offsets_[u]; idx < offsets_[u + 1]; ++idx)
                if (u < cols_[idx]) out.emplace_back(u, cols_[idx]);
        return out;
    }

    Eigen::MatrixXd dense_adjacency() const {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
        for (int u = 0; u < n_; ++u)
            for (int idx = offsets_[u]; idx < offsets_[u + 1]; ++idx) a(u, cols_[idx]) = 1.0;
        return a;
    }

    const std::vector<int>& offsets() const { return offsets_; }
    const std::vector<int>& col_indices() const { return cols_; }

private:
    int n_ = 0;
    std::vector<int> offsets_;
    std::vector<int> cols_;
};

/// L = D^{-1/2} W D^{-1/2} exposed as a linear operator over the CSR graph.
/// Never materializes an n x n matrix unless dense() is asked for below the
/// configured limit.
class NormalizedLaplacian {
public:
    explicit NormalizedLaplacian(SparseGraph graph) : graph_(std::move(graph)) {
        const int n = graph_.size();
        inv_sqrt_deg_.resize(n);
        for (int i = 0; i < n; ++i) {
            const int d = graph_.degree(i);
            if (d == 0) throw IsolatedVertexError(i);
            inv_sqrt_deg_[i] = 1.0 / std::sqrt(static_cast<double>(d));
        }
    }

    int size() const { return graph_.size(); }
    const SparseGraph& graph() const { return graph_; }
    const Eigen::VectorXd& inv_sqrt_degrees() const { return inv_sqrt_deg_; }

    /// y = L x in O(|E|) work.
    Eigen::VectorXd matvec(const Eigen::VectorXd& x) const {
        const int n = graph_.size();
        if (x.size() != n) throw std::invalid_argument("matvec: length mismatch");
        Eigen::VectorXd y(n);
        const auto& off = graph_.offsets();
        const auto& col = graph_.col_indices();
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int idx = off[i]; idx < off[i + 1]; ++idx) acc += inv_sqrt_deg_[col[idx]] * x[col[idx]];
            y[i] = inv_sqrt_deg_[i] * acc;
        }
        return y;
    }

    /// Panel form Y = L X for row-major X (n x d); one CSR sweep, each row of
    /// X read contiguously. X and Y must not alias.
    void apply_into(const RowMatrix& x, RowMatrix& y) const {
        const int n = graph_.size();
        if (x.rows() != n) throw std::invalid_argument("apply: row count mismatch");
        const int d = static_cast<int>(x.cols());
        y.resize(n, d);
        const auto& off = graph_.offsets();
        const auto& col = graph_.col_indices();
        const double* xp = x.data();
        double* yp = y.data();
        for (int i = 0; i < n; ++i) {
            double* yrow = yp + static_cast<std::ptrdiff_t>(i) * d;
            std::fill(yrow, yrow + d, 0.0);
            for (int idx = off[i]; idx < off[i + 1]; ++idx) {
                const int j = col[idx];
                const double w = inv_sqrt_deg_[j];
                const double* xrow = xp + static_cast<std::ptrdiff_t>(j) * d;
                for (int c = 0; c < d; ++c) yrow[c] += w * xrow[c];
            }
            const double si = inv_sqrt_deg_[i];
            for (int c = 0; c < d; ++c) yrow[c] *= si;
        }
    }

    RowMatrix apply(const RowMatrix& x) const {
        RowMatrix y;
        apply_into(x, y);
        return y;
    }

    /// Dense materialization; refused above the limit so that large-graph
    /// pipelines cannot silently fall back to O(n^2) memory.
    Eigen::MatrixXd dense(int dense_limit = kDefaultDenseLimit) const {
        const int n = graph_.size();
        if (n > dense_limit)
            throw std::invalid_argument("dense Laplacian refused: n=" + std::to_string(n) + " exceeds limit " +
                                        std::to_string(dense_limit));
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
        const auto& off = graph_.offsets();
        const auto& col = graph_.col_indices();
        for (int i = 0; i < n; ++i)
            for (int idx = off[i]; idx < off[i + 1]; ++idx)
                l(i, col[idx]) = inv_sqrt_deg_[i] * inv_sqrt_deg_[col[idx]];
        return l;
    }

    static constexpr int kDefaultDenseLimit = 4096;

private:
    SparseGraph graph_;
    Eigen::VectorXd inv_sqrt_deg_;
};

struct SparsityStats {
    double tau; // min expected (or realized) degree divided by n
};

/// tau from expected degrees (population row sums).
inline SparsityStats tau_from_degrees(const Eigen::VectorXd& degrees) {
    const int n = static_cast<int>(degrees.size());
    if (n == 0) throw std::invalid_argument("tau: empty degree vector");
    const double dmin = degrees.minCoeff();
    if (dmin <= 0.0) throw std::invalid_argument("tau: zero expected degree");
    return {dmin / static_cast<double>(n)};
}

/// Realized-degree fallback for graphs loaded without a population model.
inline SparsityStats tau(const SparseGraph& g) {
    Eigen::VectorXd deg(g.size());
    for (int i = 0; i < g.size(); ++i) deg[i] = g.degree(i);
    return tau_from_degrees(deg);
}

} // namespace gfc
