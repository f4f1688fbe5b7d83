#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "bandgraph/graph.hpp"
#include "bandgraph/gwishart.hpp"
#include "bandgraph/rng.hpp"

namespace bandgraph {

/// G-Wishart parameters of the (G, Omega) full conditional: shape d + n,
/// inverse scale D + U with U the centered coefficient scatter.
struct PosteriorGwParams {
    double shape = 0.0;
    Eigen::MatrixXd inv_scale;

    GWishartParams as_gwishart() const { return {shape, inv_scale}; }
    void validate(int n_nodes) const { as_gwishart().validate(n_nodes); }
};

/// Current point of the birth-death process. `weight` is the expected
/// holding time 1/(total birth rate + total death rate) recorded by the
/// step that produced this state, i.e. the weight of the visited state the
/// process departed from.
struct BdState {
    PrecisionMatrix omega;
    double weight = 1.0;

    const Graph& graph() const { return omega.graph; }
};

struct BdOptions {
    double max_rate = 1e10;  // cap on each individual rate
    // Optional exact backend: memoized MC prior normalizing constants enter
    // the rates, making the stationary law the exact full conditional. Only
    // feasible for small p; when null, the prior-constant ratio is omitted.
    const NormConstCache* prior_norm = nullptr;
};

/// All rates of the current state. Death rates are per existing edge; every
/// non-edge carries birth rate 1 under the dimension-matched construction
/// (the proposal density and target ratio are booked into the death rates,
/// which keeps Preston's balance conditions exact).
struct BdRates {
    std::vector<std::pair<int, int>> death_edges;
    std::vector<double> death_rates;
    double total_death = 0.0;
    int n_birth = 0;

    double total() const { return total_death + n_birth; }
    double weight() const { return 1.0 / total(); }
};

BdRates compute_rates(const BdState& state, const PosteriorGwParams& post,
                      const GraphPrior& prior, const BdOptions& opts = {});

/// Death rate of edge (j, k), j < k, currently in the graph: the ratio of
/// the reduced-state target density (omega_jk zeroed, pivot omega_kk
/// re-completed at fixed conditional variance) to the current density,
/// times the birth-proposal density of the removed element and the graph
/// prior ratio. The proposal is the conditional Gaussian of the element
/// given the rest, so the rate reduces to a closed form free of the removed
/// value. Computed in log space and capped at opts.max_rate.
double death_rate(int j, int k, const BdState& state, const PosteriorGwParams& post,
                  const GraphPrior& prior, const BdOptions& opts = {});

/// Birth rate of non-edge (j, k): identically 1 in this construction.
double birth_rate(int j, int k, const BdState& state, const PosteriorGwParams& post,
                  const GraphPrior& prior, const BdOptions& opts = {});

/// Diagnostics of one step, mainly for recording and tests.
struct BdStepReport {
    PrecisionMatrix visited;   // post-refresh state the weight belongs to
    double weight = 0.0;
    std::pair<int, int> move{-1, -1};
    bool was_birth = false;
    bool refresh_accepted = false;
};

/// One jump of the birth-death process.
///
/// The step first refreshes Omega with an exact G-Wishart draw on the
/// current graph, Metropolized against the holding-time-biased conditional
/// g(Omega) proportional to pi(Omega | G) * (total rate): visited states
/// then follow the jump chain of the continuous-time process exactly, which
/// is what makes the holding-time weighted averages consistent (a plain
/// refresh gives birth-less graphs heavy-tailed holding times whose mean
/// diverges on diffuse targets). It then records the expected holding time
/// w = 1/(total rate), jumps to a neighboring graph with probability
/// proportional to the rates, and lands dimension-matched: a birth draws
/// the new element from its conditional Gaussian and re-completes the
/// pivot, a death zeroes the element and re-completes the pivot, so
/// positive definiteness is preserved by construction.
///
/// The returned state carries the pre-jump weight; the matching visited
/// state is exposed through the optional report.
BdState birth_death_step(const BdState& state, const PosteriorGwParams& post,
                         const GraphPrior& prior, Rng& rng,
                         const BdOptions& opts = {},
                         BdStepReport* report = nullptr);

}  // namespace bandgraph
