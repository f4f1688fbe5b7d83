#include "bandgraph/bdmcmc.hpp"

#include <cmath>
#include <numbers>

#include "bandgraph/errors.hpp"

namespace bandgraph {

namespace {

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericError("bdmcmc: precision matrix is not positive definite");
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

// Conditional-Gaussian quantities of element (j,k) with pivot k, computed
// from the reduced state (edge value w zeroed): the element given the rest
// is N(-b/prec, 1/prec) under the target kernel.
struct EdgeConditional {
    double prec = 0.0;  // a_jj * S_kk
    double b = 0.0;     // S_jk + (A v0)_j * S_kk
    double a_jj = 0.0;  // (Omega_{-k,-k}^{-1})_jj
    double av0_j = 0.0; // (A v0)_j, pivot column without the element
};

EdgeConditional edge_conditional(int j, int k, double w,
                                 const Eigen::MatrixXd& sigma,
                                 const Eigen::MatrixXd& S) {
    EdgeConditional ec;
    const double s_jk = sigma(j, k);
    const double s_kk = sigma(k, k);
    ec.a_jj = sigma(j, j) - s_jk * s_jk / s_kk;
    ec.av0_j = -s_jk / s_kk - w * ec.a_jj;
    ec.prec = ec.a_jj * S(k, k);
    ec.b = S(j, k) + ec.av0_j * S(k, k);
    if (!(ec.prec > 0.0))
        throw NumericError("bdmcmc: nonpositive proposal precision");
    return ec;
}

// Log death rate of edge (j,k): the proposal density telescopes against the
// target ratio, leaving a closed form in the reduced-state quantities. The
// determinant is unchanged because the pivot re-completion holds the
// conditional variance of node k fixed.
double log_death_rate(int j, int k, const Eigen::MatrixXd& omega,
                      const Eigen::MatrixXd& sigma, const Graph& g,
                      const PosteriorGwParams& post, const GraphPrior& prior,
                      const BdOptions& opts) {
    const EdgeConditional ec =
        edge_conditional(j, k, omega(j, k), sigma, post.inv_scale);
    double log_rate = 0.5 * std::log(ec.prec) -
                      0.5 * std::log(2.0 * std::numbers::pi) -
                      0.5 * ec.b * ec.b / ec.prec +
                      std::log(prior_ratio_edge(prior, j, k, /*present=*/true));
    if (opts.prior_norm) {
        Graph reduced = g;
        reduced.remove_edge(j, k);
        log_rate += opts.prior_norm->log_const(g) - opts.prior_norm->log_const(reduced);
    }
    if (std::isnan(log_rate))
        throw NumericError("bdmcmc: death rate is NaN");
    return std::min(log_rate, std::log(opts.max_rate));
}

BdRates rates_from(const Eigen::MatrixXd& omega, const Eigen::MatrixXd& sigma,
                   const Graph& g, const PosteriorGwParams& post,
                   const GraphPrior& prior, const BdOptions& opts) {
    BdRates rates;
    rates.death_edges = g.edges();
    rates.death_rates.reserve(rates.death_edges.size());
    for (const auto& [j, k] : rates.death_edges) {
        const double r =
            std::exp(log_death_rate(j, k, omega, sigma, g, post, prior, opts));
        rates.death_rates.push_back(r);
        rates.total_death += r;
    }
    rates.n_birth = g.max_edges() - g.n_edges();
    return rates;
}

}  // namespace

BdRates compute_rates(const BdState& state, const PosteriorGwParams& post,
                      const GraphPrior& prior, const BdOptions& opts) {
    const Graph& g = state.graph();
    post.validate(g.n_nodes());
    prior.validate(g.n_nodes());
    if (!(opts.max_rate > 0.0))
        throw InputError("bdmcmc: max_rate must be positive");
    const Eigen::MatrixXd sigma = spd_inverse(state.omega.values);
    return rates_from(state.omega.values, sigma, g, post, prior, opts);
}

double death_rate(int j, int k, const BdState& state, const PosteriorGwParams& post,
                  const GraphPrior& prior, const BdOptions& opts) {
    if (j > k) std::swap(j, k);
    if (!state.graph().has_edge(j, k))
        throw InputError("death_rate: edge not present in the graph");
    post.validate(state.graph().n_nodes());
    const Eigen::MatrixXd sigma = spd_inverse(state.omega.values);
    return std::exp(log_death_rate(j, k, state.omega.values, sigma, state.graph(),
                                   post, prior, opts));
}

double birth_rate(int j, int k, const BdState& state, const PosteriorGwParams& post,
                  const GraphPrior& prior, const BdOptions& opts) {
    if (j > k) std::swap(j, k);
    if (state.graph().has_edge(j, k))
        throw InputError("birth_rate: edge already present in the graph");
    post.validate(state.graph().n_nodes());
    (void)prior;
    (void)opts;
    return 1.0;
}

BdState birth_death_step(const BdState& state, const PosteriorGwParams& post,
                         const GraphPrior& prior, Rng& rng, const BdOptions& opts,
                         BdStepReport* report) {
    const Graph& g = state.graph();
    post.validate(g.n_nodes());
    prior.validate(g.n_nodes());
    if (!(opts.max_rate > 0.0))
        throw InputError("bdmcmc: max_rate must be positive");
    if (g.max_edges() == 0)
        throw NumericError("birth_death_step: no possible moves on one node");

    // Metropolized refresh: an exact G-Wishart draw proposed against the
    // holding-time-biased conditional, accepted on the total-rate ratio.
    Eigen::MatrixXd omega = state.omega.values;
    Eigen::MatrixXd sigma = spd_inverse(omega);
    BdRates rates = rates_from(omega, sigma, g, post, prior, opts);

    const PrecisionMatrix proposal = sample_direct(post.as_gwishart(), g, rng);
    const Eigen::MatrixXd prop_sigma = spd_inverse(proposal.values);
    const BdRates prop_rates =
        rates_from(proposal.values, prop_sigma, g, post, prior, opts);
    bool accepted = false;
    if (draw_uniform(rng) * rates.total() < prop_rates.total()) {
        omega = proposal.values;
        sigma = prop_sigma;
        rates = prop_rates;
        accepted = true;
    }

    const double total = rates.total();
    if (!(total > 0.0) || !std::isfinite(total))
        throw NumericError("birth_death_step: total rate is zero or non-finite");
    const double weight = 1.0 / total;

    // Jump: one event with probability proportional to its rate.
    Graph next_graph = g;
    int mj = -1, mk = -1;
    bool was_birth = false;
    const double x = draw_uniform(rng, 0.0, total);
    if (x < rates.n_birth) {
        const int idx = std::min(static_cast<int>(x), rates.n_birth - 1);
        const auto non_edges = next_graph.non_edges();
        mj = non_edges[idx].first;
        mk = non_edges[idx].second;
        was_birth = true;
    } else {
        double rem = x - rates.n_birth;
        std::size_t idx = 0;
        for (; idx + 1 < rates.death_rates.size(); ++idx) {
            rem -= rates.death_rates[idx];
            if (rem < 0.0) break;
        }
        mj = rates.death_edges[idx].first;
        mk = rates.death_edges[idx].second;
    }

    // Dimension-matched landing: pivot re-completion keeps the conditional
    // variance of node mk fixed, so the result stays positive definite.
    Eigen::MatrixXd landed = omega;
    if (was_birth) {
        const EdgeConditional ec =
            edge_conditional(mj, mk, 0.0, sigma, post.inv_scale);
        const double u =
            draw_normal(rng, -ec.b / ec.prec, 1.0 / std::sqrt(ec.prec));
        landed(mj, mk) = landed(mk, mj) = u;
        landed(mk, mk) += 2.0 * u * ec.av0_j + u * u * ec.a_jj;
        next_graph.add_edge(mj, mk);
    } else {
        const double w_e = omega(mj, mk);
        const double s_jk = sigma(mj, mk);
        const double s_kk = sigma(mk, mk);
        const double a_jj = sigma(mj, mj) - s_jk * s_jk / s_kk;
        const double av_j = -s_jk / s_kk;  // full pivot column
        landed(mj, mk) = landed(mk, mj) = 0.0;
        landed(mk, mk) += -2.0 * w_e * av_j + w_e * w_e * a_jj;
        next_graph.remove_edge(mj, mk);
    }

    if (report) {
        report->visited = PrecisionMatrix{omega, g};
        report->weight = weight;
        report->move = {mj, mk};
        report->was_birth = was_birth;
        report->refresh_accepted = accepted;
    }

    BdState next;
    next.omega = PrecisionMatrix{std::move(landed), std::move(next_graph)};
    next.weight = weight;
    return next;
}

}  // namespace bandgraph
