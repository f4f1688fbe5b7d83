#pragma once

#include <Eigen/Dense>

#include "bandgraph/bspline.hpp"
#include "bandgraph/gibbs.hpp"
#include "bandgraph/graph.hpp"

namespace bandgraph {

/// Posterior edge-inclusion probabilities: p x p symmetric, zero diagonal.
struct EdgeProbMatrix {
    Eigen::MatrixXd values;

    int n_nodes() const { return static_cast<int>(values.rows()); }
};

/// Rao-Blackwellized precision estimate: holding-time weighted average of
/// the stored Omega draws.
Eigen::MatrixXd omega_hat(const WeightedChain& chain);

/// p_jk = sum_t 1((j,k) in E_t) w_t / sum_t w_t over every saved sweep.
EdgeProbMatrix edge_probs(const WeightedChain& chain);

/// Edges with inclusion probability strictly above 0.5.
Graph select_median_graph(const EdgeProbMatrix& probs);

struct BfdrSelection {
    Graph graph;
    double threshold = 1.0;
};

/// Bayesian false discovery rate selection: over candidate thresholds s
/// (the distinct probabilities), BFDR(s) is the weighted share of doubt
/// among included edges; returns the graph at the smallest s with
/// BFDR(s) < alpha, or the empty graph and threshold 1 if none qualifies.
BfdrSelection select_bfdr_graph(const EdgeProbMatrix& probs, double alpha = 0.05);

/// BFDR value at a given threshold; 0 when no edge reaches the threshold.
double bfdr_at(const EdgeProbMatrix& probs, double s);

/// Fitted curves Phi * beta_hat_i from the chain's running coefficient
/// means; n x r.
Eigen::MatrixXd smooth_estimates(const WeightedChain& chain,
                                 const DesignMatrix& design);

struct PosteriorSummary {
    Eigen::MatrixXd omega_hat;
    EdgeProbMatrix edge_probs;
    Graph median_graph;
    BfdrSelection bfdr;
    Eigen::MatrixXd beta_hat;  // n x p
    Eigen::VectorXd mu_hat;
    double tau2_hat = 0.0;
    Eigen::MatrixXd fitted;    // n x r
};

PosteriorSummary summarize(const WeightedChain& chain, const DesignMatrix& design,
                           double alpha = 0.05);

}  // namespace bandgraph
