#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bandgraph/rng.hpp"

namespace bandgraph {

/// Undirected simple graph on p nodes. Node indices are 0-based in the API
/// and 1-based in all text formats.
class Graph {
public:
    Graph() = default;
    explicit Graph(int n_nodes);

    int n_nodes() const { return p_; }
    int n_edges() const { return n_edges_; }
    int max_edges() const { return p_ * (p_ - 1) / 2; }

    bool has_edge(int j, int k) const;
    void add_edge(int j, int k);
    void remove_edge(int j, int k);

    /// Sorted neighbor list of node j.
    const std::vector<int>& neighbors(int j) const { return nbrs_[j]; }

    /// All edges as (j, k) with j < k, lexicographically sorted.
    std::vector<std::pair<int, int>> edges() const;

    /// All non-edges as (j, k) with j < k.
    std::vector<std::pair<int, int>> non_edges() const;

    /// Edge indicators packed into 64-bit words, ordered by (j, k), j < k.
    /// Stable across calls; usable as a map key.
    std::vector<std::uint64_t> edge_bits() const;

    /// FNV-1a hash of edge_bits(); used in trace logs.
    std::uint64_t hash() const;

    bool operator==(const Graph& other) const;
    bool operator!=(const Graph& other) const { return !(*this == other); }

private:
    void check_pair(int j, int k) const;

    int p_ = 0;
    int n_edges_ = 0;
    std::vector<bool> adj_;
    std::vector<std::vector<int>> nbrs_;
};

/// Prior over graphs: uniform on the graph space, or independent Bernoulli
/// edges with a common probability or a per-edge probability matrix.
struct GraphPrior {
    enum class Kind { Uniform, Bernoulli };

    Kind kind = Kind::Uniform;
    double theta = 0.5;                 // common edge probability
    Eigen::MatrixXd theta_matrix;       // optional p x p per-edge probabilities

    static GraphPrior uniform();
    static GraphPrior bernoulli(double theta);
    static GraphPrior bernoulli(const Eigen::MatrixXd& theta);

    bool has_matrix() const { return theta_matrix.size() > 0; }
    double edge_theta(int j, int k) const;
    void validate(int n_nodes) const;
};

/// Log prior density up to an additive constant. Uniform: 0. Bernoulli:
/// sum of log theta over edges plus log(1-theta) over non-edges.
double log_prior(const GraphPrior& prior, const Graph& g);

/// Prior ratio for a single-edge move. `present` means the edge is in the
/// graph and the move removes it: pi(G-e)/pi(G). Otherwise pi(G+e)/pi(G).
double prior_ratio_edge(const GraphPrior& prior, int j, int k, bool present);

/// Number of graphs on p nodes: 2^(p(p-1)/2). Saturates at UINT64_MAX when
/// the exponent exceeds 63 (p >= 12).
std::uint64_t graph_space_size(int p);

/// Structural Hamming distance: size of the symmetric difference of the
/// edge sets, optionally divided by p(p-1)/2.
double shd(const Graph& g1, const Graph& g2, bool standardized = false);

/// Each edge included independently with probability `sparsity`.
Graph sample_random_graph(int p, double sparsity, Rng& rng);

/// Edges only within blocks of the given node partition, each included
/// independently with probability `sparsity`.
Graph sample_block_graph(int p, const std::vector<std::vector<int>>& blocks,
                         double sparsity, Rng& rng);

/// Evenly sized contiguous blocks, convenience for block-graph experiments.
std::vector<std::vector<int>> even_blocks(int p, int n_blocks);

/// Edge-list text format: one "j,k" per line, 1-based, j < k.
void write_edge_list(std::ostream& os, const Graph& g);
Graph read_edge_list(std::istream& is, int n_nodes);

/// 0/1 adjacency matrix CSV, p x p, symmetric, zero diagonal.
void write_adjacency_csv(std::ostream& os, const Graph& g);
Graph read_adjacency_csv(std::istream& is);

}  // namespace bandgraph
