#include "bandgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "bandgraph/errors.hpp"

namespace bandgraph {

Graph::Graph(int n_nodes) : p_(n_nodes) {
    if (n_nodes < 1) throw InputError("Graph: n_nodes must be >= 1");
    adj_.assign(static_cast<std::size_t>(p_) * p_, false);
    nbrs_.resize(p_);
}

void Graph::check_pair(int j, int k) const {
    if (j < 0 || k < 0 || j >= p_ || k >= p_)
        throw InputError("Graph: node index out of range");
    if (j == k) throw InputError("Graph: self-loops are not allowed");
}

bool Graph::has_edge(int j, int k) const {
    check_pair(j, k);
    return adj_[static_cast<std::size_t>(j) * p_ + k];
}

void Graph::add_edge(int j, int k) {
    check_pair(j, k);
    if (adj_[static_cast<std::size_t>(j) * p_ + k]) return;
    adj_[static_cast<std::size_t>(j) * p_ + k] = true;
    adj_[static_cast<std::size_t>(k) * p_ + j] = true;
    nbrs_[j].insert(std::lower_bound(nbrs_[j].begin(), nbrs_[j].end(), k), k);
    nbrs_[k].insert(std::lower_bound(nbrs_[k].begin(), nbrs_[k].end(), j), j);
    ++n_edges_;
}

void Graph::remove_edge(int j, int k) {
    check_pair(j, k);
    if (!adj_[static_cast<std::size_t>(j) * p_ + k]) return;
    adj_[static_cast<std::size_t>(j) * p_ + k] = false;
    adj_[static_cast<std::size_t>(k) * p_ + j] = false;
    nbrs_[j].erase(std::lower_bound(nbrs_[j].begin(), nbrs_[j].end(), k));
    nbrs_[k].erase(std::lower_bound(nbrs_[k].begin(), nbrs_[k].end(), j));
    --n_edges_;
}

std::vector<std::pair<int, int>> Graph::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(n_edges_);
    for (int j = 0; j < p_; ++j)
        for (int k : nbrs_[j])
            if (k > j) out.emplace_back(j, k);
    return out;
}

std::vector<std::pair<int, int>> Graph::non_edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(max_edges() - n_edges_);
    for (int j = 0; j < p_; ++j)
        for (int k = j + 1; k < p_; ++k)
            if (!adj_[static_cast<std::size_t>(j) * p_ + k]) out.emplace_back(j, k);
    return out;
}

std::vector<std::uint64_t> Graph::edge_bits() const {
    std::vector<std::uint64_t> bits((max_edges() + 63) / 64, 0);
    int idx = 0;
    for (int j = 0; j < p_; ++j)
        for (int k = j + 1; k < p_; ++k, ++idx)
            if (adj_[static_cast<std::size_t>(j) * p_ + k])
                bits[idx / 64] |= (std::uint64_t{1} << (idx % 64));
    return bits;
}

std::uint64_t Graph::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffULL;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(p_));
    for (std::uint64_t w : edge_bits()) mix(w);
    return h;
}

bool Graph::operator==(const Graph& other) const {
    return p_ == other.p_ && adj_ == other.adj_;
}

GraphPrior GraphPrior::uniform() {
    GraphPrior pr;
    pr.kind = Kind::Uniform;
    return pr;
}

GraphPrior GraphPrior::bernoulli(double theta) {
    GraphPrior pr;
    pr.kind = Kind::Bernoulli;
    pr.theta = theta;
    return pr;
}

GraphPrior GraphPrior::bernoulli(const Eigen::MatrixXd& theta) {
    GraphPrior pr;
    pr.kind = Kind::Bernoulli;
    pr.theta_matrix = theta;
    return pr;
}

double GraphPrior::edge_theta(int j, int k) const {
    return has_matrix() ? theta_matrix(j, k) : theta;
}

void GraphPrior::validate(int n_nodes) const {
    if (kind == Kind::Uniform) return;
    if (has_matrix()) {
        if (theta_matrix.rows() != n_nodes || theta_matrix.cols() != n_nodes)
            throw InputError("GraphPrior: theta matrix dimension mismatch");
        for (int j = 0; j < n_nodes; ++j)
            for (int k = j + 1; k < n_nodes; ++k) {
                const double t = theta_matrix(j, k);
                if (!(t > 0.0 && t < 1.0))
                    throw InputError("GraphPrior: theta entries must lie in (0,1)");
            }
    } else if (!(theta > 0.0 && theta < 1.0)) {
        throw InputError("GraphPrior: theta must lie in (0,1)");
    }
}

double log_prior(const GraphPrior& prior, const Graph& g) {
    prior.validate(g.n_nodes());
    if (prior.kind == GraphPrior::Kind::Uniform) return 0.0;
    double lp = 0.0;
    for (int j = 0; j < g.n_nodes(); ++j)
        for (int k = j + 1; k < g.n_nodes(); ++k) {
            const double t = prior.edge_theta(j, k);
            lp += g.has_edge(j, k) ? std::log(t) : std::log1p(-t);
        }
    return lp;
}

double prior_ratio_edge(const GraphPrior& prior, int j, int k, bool present) {
    if (prior.kind == GraphPrior::Kind::Uniform) return 1.0;
    const double t = prior.edge_theta(j, k);
    return present ? (1.0 - t) / t : t / (1.0 - t);
}

std::uint64_t graph_space_size(int p) {
    if (p < 1) throw InputError("graph_space_size: p must be >= 1");
    const int exponent = p * (p - 1) / 2;
    if (exponent > 63) return std::numeric_limits<std::uint64_t>::max();
    return std::uint64_t{1} << exponent;
}

double shd(const Graph& g1, const Graph& g2, bool standardized) {
    if (g1.n_nodes() != g2.n_nodes())
        throw InputError("shd: graphs must have the same number of nodes");
    int count = 0;
    for (int j = 0; j < g1.n_nodes(); ++j)
        for (int k = j + 1; k < g1.n_nodes(); ++k)
            if (g1.has_edge(j, k) != g2.has_edge(j, k)) ++count;
    if (!standardized) return static_cast<double>(count);
    return static_cast<double>(count) / g1.max_edges();
}

Graph sample_random_graph(int p, double sparsity, Rng& rng) {
    if (sparsity < 0.0 || sparsity > 1.0)
        throw InputError("sample_random_graph: sparsity must lie in [0,1]");
    Graph g(p);
    std::bernoulli_distribution coin(sparsity);
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k)
            if (coin(rng)) g.add_edge(j, k);
    return g;
}

Graph sample_block_graph(int p, const std::vector<std::vector<int>>& blocks,
                         double sparsity, Rng& rng) {
    if (sparsity < 0.0 || sparsity > 1.0)
        throw InputError("sample_block_graph: sparsity must lie in [0,1]");
    std::vector<int> owner(p, -1);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int node : blocks[b]) {
            if (node < 0 || node >= p)
                throw InputError("sample_block_graph: block node out of range");
            if (owner[node] != -1)
                throw InputError("sample_block_graph: node appears in two blocks");
            owner[node] = static_cast<int>(b);
        }
    for (int j = 0; j < p; ++j)
        if (owner[j] == -1)
            throw InputError("sample_block_graph: partition does not cover all nodes");

    Graph g(p);
    std::bernoulli_distribution coin(sparsity);
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k)
            if (owner[j] == owner[k] && coin(rng)) g.add_edge(j, k);
    return g;
}

std::vector<std::vector<int>> even_blocks(int p, int n_blocks) {
    if (n_blocks < 1 || n_blocks > p)
        throw InputError("even_blocks: need 1 <= n_blocks <= p");
    std::vector<std::vector<int>> blocks(n_blocks);
    for (int j = 0; j < p; ++j)
        blocks[static_cast<std::size_t>(j) * n_blocks / p].push_back(j);
    return blocks;
}

void write_edge_list(std::ostream& os, const Graph& g) {
    for (const auto& [j, k] : g.edges()) os << j + 1 << "," << k + 1 << "\n";
}

Graph read_edge_list(std::istream& is, int n_nodes) {
    Graph g(n_nodes);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        int j = 0, k = 0;
        char comma = 0;
        if (!(ls >> j >> comma >> k) || comma != ',') {
            std::ostringstream os;
            os << "edge list: malformed line " << lineno << ": '" << line << "'";
            throw IoError(os.str());
        }
        if (j >= k)
            throw IoError("edge list: expected j < k (1-based) on line " +
                          std::to_string(lineno));
        g.add_edge(j - 1, k - 1);
    }
    return g;
}

void write_adjacency_csv(std::ostream& os, const Graph& g) {
    for (int j = 0; j < g.n_nodes(); ++j) {
        for (int k = 0; k < g.n_nodes(); ++k) {
            if (k) os << ",";
            os << (j != k && g.has_edge(j, k) ? 1 : 0);
        }
        os << "\n";
    }
}

Graph read_adjacency_csv(std::istream& is) {
    std::vector<std::vector<int>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<int> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stoi(cell));
        rows.push_back(std::move(row));
    }
    const int p = static_cast<int>(rows.size());
    if (p == 0) throw IoError("adjacency csv: empty file");
    Graph g(p);
    for (int j = 0; j < p; ++j) {
        if (static_cast<int>(rows[j].size()) != p)
            throw IoError("adjacency csv: ragged row " + std::to_string(j + 1));
        for (int k = j + 1; k < p; ++k) {
            if (rows[j][k] != rows[k][j])
                throw IoError("adjacency csv: matrix is not symmetric");
            if (rows[j][k]) g.add_edge(j, k);
        }
        if (rows[j][j] != 0) throw IoError("adjacency csv: nonzero diagonal");
    }
    return g;
}

}  // namespace bandgraph
