#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bandgraph/bdmcmc.hpp"
#include "bandgraph/bspline.hpp"
#include "bandgraph/dataset.hpp"
#include "bandgraph/graph.hpp"
#include "bandgraph/gwishart.hpp"
#include "bandgraph/rng.hpp"

namespace bandgraph {

struct Hyperparameters {
    BasisSpec basis;
    GWishartParams gw_prior;    // shape d, inverse scale D (p x p)
    GraphPrior graph_prior;
    double sigma_mu2 = 100.0;   // prior variance of mu
    double a = 10.0;            // error-variance conditional uses shape (nr+a)/2
    double b = 0.001;           // and rate (b + residual sum of squares)/2

    void validate() const;
};

/// Current point of the sampler: per-curve coefficients, shared mean, error
/// variance, and the graphical component.
struct McmcState {
    Eigen::MatrixXd betas;  // n x p
    Eigen::VectorXd mu;     // p
    double tau2 = 1.0;
    BdState bd;
};

struct SamplerControls {
    long n_iter = 60000;
    long burn_in = 10000;
    int thin_omega = 10;       // store every k-th post-burn-in Omega
    double max_rate = 1e10;
    bool exact_prior_ratio = false;  // MC prior-constant ratios in the rates
    int norm_const_samples = 20000;  // MC samples per graph in exact mode
    bool fix_graph = false;          // skip graph moves; Omega refreshed on the
                                     // initial graph every sweep

    void validate() const;
};

/// Post-burn-in record of the chain. Graphs and holding-time weights are
/// kept for every saved sweep; Omega is thinned. Regression summaries are
/// unweighted running means (the holding times belong to the jump chain of
/// (G, Omega), not to the discrete-time regression updates).
struct WeightedChain {
    int p = 0;
    long n_saved = 0;

    std::vector<std::vector<std::uint64_t>> graphs;  // edge bits per sweep
    std::vector<int> n_edges;
    std::vector<std::uint64_t> graph_hashes;
    std::vector<double> weights;
    std::vector<double> tau2;
    std::vector<double> log_post;                    // log target proxy of (G, Omega)

    std::vector<long> omega_iters;                   // saved-sweep index of each
    std::vector<Eigen::MatrixXd> omegas;

    Eigen::MatrixXd beta_mean;  // n x p
    Eigen::VectorXd mu_mean;    // p
    double tau2_mean = 0.0;
};

/// Decode a stored edge-bit row back into a Graph.
Graph graph_from_bits(int p, const std::vector<std::uint64_t>& bits);

/// Quantities reused across sweeps; rebuild when the data change.
struct SamplerWorkspace {
    Eigen::MatrixXd phi;        // r x p
    Eigen::MatrixXd phi_t_phi;  // p x p
    Eigen::MatrixXd phi_t_y;    // p x n
    Eigen::VectorXd y_sqnorm;   // n
    int n = 0, r = 0, p = 0;

    SamplerWorkspace() = default;
    SamplerWorkspace(const DesignMatrix& design, const Eigen::MatrixXd& curves);
};

/// beta_i | rest ~ N(B (Phi' Y_i / tau2 + Omega mu), B) with
/// B = (Phi'Phi / tau2 + Omega)^{-1}; one factorization shared over i.
void update_betas(McmcState& state, const SamplerWorkspace& ws, Rng& rng);

/// mu | rest: Gaussian with precision M = I/sigma_mu2 + n*Omega and mean
/// M^{-1} Omega sum_i beta_i.
void update_mu(McmcState& state, double sigma_mu2, Rng& rng);

/// tau2 | rest ~ IG((nr + a)/2, (b + total squared residual)/2).
void update_tau2(McmcState& state, const SamplerWorkspace& ws, double a, double b,
                 Rng& rng);

/// U = sum_i (beta_i - mu)(beta_i - mu)^T.
Eigen::MatrixXd coefficient_scatter(const Eigen::MatrixXd& betas,
                                    const Eigen::VectorXd& mu);

/// Full run of the sampler: conjugate updates for beta, mu, tau2, then one
/// birth-death jump with an exact Omega refresh, per sweep.
WeightedChain run_chain(const SpectraDataset& data, const Hyperparameters& hp,
                        const SamplerControls& ctrl, Rng& rng);

/// Concatenate post-burn-in samples of independent chains run with the same
/// controls; running means are averaged.
WeightedChain pool_chains(const std::vector<WeightedChain>& chains);

}  // namespace bandgraph
