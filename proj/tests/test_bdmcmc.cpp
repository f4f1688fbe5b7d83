#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "bandgraph/bdmcmc.hpp"
#include "bandgraph/errors.hpp"
#include "test_helpers.hpp"

using namespace bandgraph;

namespace {

Graph complete_graph(int p) {
    Graph g(p);
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) g.add_edge(j, k);
    return g;
}

// n coefficient vectors from N(0, Omega^{-1}) under a fixed sparse truth,
// returned as the scatter matrix U.
Eigen::MatrixXd synthetic_scatter(int p, int n, const Graph& truth, Rng& rng) {
    const GWishartParams gw{3.0, Eigen::MatrixXd::Identity(p, p)};
    const PrecisionMatrix omega = sample_direct(gw, truth, rng);
    Eigen::LLT<Eigen::MatrixXd> llt(omega.values);
    Eigen::MatrixXd betas(n, p);
    Eigen::VectorXd z(p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) z[j] = draw_normal(rng);
        betas.row(i) = llt.matrixL().transpose().solve(z).transpose();
    }
    return betas.transpose() * betas;
}

std::size_t graph_index(const std::vector<Graph>& all, const Graph& g) {
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i] == g) return i;
    throw std::logic_error("graph not found");
}

// Weighted occupancy of the chain over all graphs on p nodes.
std::vector<double> chain_distribution(const std::vector<Graph>& all,
                                       BdState state,
                                       const PosteriorGwParams& post,
                                       const GraphPrior& prior,
                                       const BdOptions& opts, int steps,
                                       Rng& rng) {
    std::vector<double> mass(all.size(), 0.0);
    for (int t = 0; t < steps; ++t) {
        const std::size_t idx = graph_index(all, state.graph());
        state = birth_death_step(state, post, prior, rng, opts);
        mass[idx] += state.weight;  // pre-jump weight belongs to the left state
    }
    double total = 0.0;
    for (double m : mass) total += m;
    for (double& m : mass) m /= total;
    return mass;
}

// Exact posterior over all graphs from the marginal conditional with Monte
// Carlo prior and posterior normalizing constants.
std::vector<double> enumeration_oracle(const std::vector<Graph>& all,
                                       const GWishartParams& prior_gw,
                                       const PosteriorGwParams& post,
                                       const GraphPrior& prior, int mc_samples,
                                       bool include_prior_const) {
    NormConstCache prior_cache(prior_gw, mc_samples, 11);
    NormConstCache post_cache(post.as_gwishart(), mc_samples, 22);
    std::vector<double> logw(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        logw[i] = log_prior(prior, all[i]) + post_cache.log_const(all[i]);
        if (include_prior_const) logw[i] -= prior_cache.log_const(all[i]);
    }
    const double m = *std::max_element(logw.begin(), logw.end());
    double total = 0.0;
    for (double& w : logw) {
        w = std::exp(w - m);
        total += w;
    }
    for (double& w : logw) w /= total;
    return logw;
}

}  // namespace

TEST_CASE("rate structure") {
    Rng rng = make_stream(1);
    const int p = 3;
    const GWishartParams gw{3.0, Eigen::MatrixXd::Identity(p, p)};
    PosteriorGwParams post{6.0, testutil::random_spd(p, rng, 2.0)};
    const GraphPrior uniform = GraphPrior::uniform();

    SUBCASE("complete graph has zero total birth rate") {
        BdState state;
        state.omega = sample_direct(post.as_gwishart(), complete_graph(p), rng);
        const BdRates rates = compute_rates(state, post, uniform);
        CHECK(rates.n_birth == 0);
        CHECK(rates.death_rates.size() == 3);
    }
    SUBCASE("empty graph has zero total death rate and unit births") {
        BdState state;
        state.omega = sample_direct(post.as_gwishart(), Graph(p), rng);
        const BdRates rates = compute_rates(state, post, uniform);
        CHECK(rates.total_death == 0.0);
        CHECK(rates.n_birth == 3);
        CHECK(birth_rate(0, 1, state, post, uniform) == 1.0);
    }
    SUBCASE("weight is the reciprocal of the total rate at the visited state") {
        BdState state;
        Graph g(p);
        g.add_edge(0, 1);
        state.omega = sample_direct(post.as_gwishart(), g, rng);
        const BdRates rates = compute_rates(state, post, uniform);
        double manual = rates.n_birth;
        for (double r : rates.death_rates) manual += r;
        CHECK(std::abs(rates.weight() * manual - 1.0) < 1e-12);

        Rng r1 = make_stream(5);
        BdStepReport report;
        const BdState next = birth_death_step(state, post, uniform, r1, {}, &report);
        CHECK(next.weight == report.weight);
        BdState visited;
        visited.omega = report.visited;
        const BdRates at_visit = compute_rates(visited, post, uniform);
        CHECK(report.weight == doctest::Approx(at_visit.weight()).epsilon(1e-12));
    }
    SUBCASE("uniform and theta=0.5 bernoulli give identical rates") {
        BdState state;
        state.omega = sample_direct(post.as_gwishart(), complete_graph(p), rng);
        const BdRates a = compute_rates(state, post, uniform);
        const BdRates b = compute_rates(state, post, GraphPrior::bernoulli(0.5));
        for (std::size_t i = 0; i < a.death_rates.size(); ++i)
            CHECK(a.death_rates[i] == doctest::Approx(b.death_rates[i]));
    }
    SUBCASE("weak edges die faster than strong edges") {
        Graph g(3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        Eigen::MatrixXd omega(3, 3);
        omega << 2.0, 0.9, 0.0,
                 0.9, 2.0, 0.01,
                 0.0, 0.01, 2.0;
        BdState state;
        state.omega = PrecisionMatrix{omega, g};
        PosteriorGwParams neutral{6.0, Eigen::MatrixXd::Identity(3, 3)};
        const double strong = death_rate(0, 1, state, neutral, uniform);
        const double weak = death_rate(1, 2, state, neutral, uniform);
        CHECK(weak > strong);
    }
    SUBCASE("rates are capped") {
        // edge present with value 0 and an enormous pivot scale in S: the
        // closed-form rate sqrt(prec/2pi) would exceed the cap
        Graph g(2);
        g.add_edge(0, 1);
        BdState state;
        state.omega = PrecisionMatrix{Eigen::MatrixXd::Identity(2, 2), g};
        PosteriorGwParams post_huge{6.0, Eigen::MatrixXd::Identity(2, 2)};
        post_huge.inv_scale(1, 1) = 1e22;
        BdOptions opts;
        const double rate = death_rate(0, 1, state, post_huge,
                                       GraphPrior::uniform(), opts);
        CHECK(rate == doctest::Approx(opts.max_rate));
    }
    SUBCASE("preconditions") {
        BdState state;
        Graph g(p);
        g.add_edge(0, 1);
        state.omega = sample_direct(post.as_gwishart(), g, rng);
        CHECK_THROWS_AS(death_rate(0, 2, state, post, uniform), InputError);
        CHECK_THROWS_AS(birth_rate(0, 1, state, post, uniform), InputError);
    }
    SUBCASE("single node has no moves") {
        BdState state;
        state.omega = PrecisionMatrix{Eigen::MatrixXd::Identity(1, 1), Graph(1)};
        PosteriorGwParams tiny{4.0, Eigen::MatrixXd::Identity(1, 1)};
        Rng r = make_stream(9);
        CHECK_THROWS_AS(birth_death_step(state, tiny, uniform, r), NumericError);
    }
}

TEST_CASE("every jump changes exactly one edge and keeps omega valid") {
    Rng rng = make_stream(77);
    const int p = 4;
    PosteriorGwParams post{7.0, testutil::random_spd(p, rng, 2.0)};
    BdState state;
    state.omega = sample_direct(post.as_gwishart(), Graph(p), rng);
    for (int t = 0; t < 300; ++t) {
        const Graph before = state.graph();
        state = birth_death_step(state, post, GraphPrior::uniform(), rng);
        CHECK(shd(before, state.graph()) == 1.0);
        CHECK(state.weight > 0.0);
        CHECK(std::isfinite(state.weight));
        validate_precision(state.omega);
    }
}

TEST_CASE("stationarity against the enumeration oracle (exact backend)") {
    const int p = 3, n = 30;
    Rng rng = make_stream(530);
    Graph truth(p);
    truth.add_edge(0, 1);
    const Eigen::MatrixXd u = synthetic_scatter(p, n, truth, rng);

    const GWishartParams prior_gw{3.0, Eigen::MatrixXd::Identity(p, p)};
    PosteriorGwParams post{3.0 + n, Eigen::MatrixXd::Identity(p, p) + u};
    const GraphPrior prior = GraphPrior::uniform();

    const auto all = testutil::enumerate_graphs(p);
    const std::vector<double> oracle =
        enumeration_oracle(all, prior_gw, post, prior, 40000, true);

    NormConstCache cache(prior_gw, 40000, 99);
    BdOptions opts;
    opts.prior_norm = &cache;
    BdState state;
    state.omega = sample_direct(post.as_gwishart(), Graph(p), rng);
    const std::vector<double> sampled =
        chain_distribution(all, state, post, prior, opts, 30000, rng);

    CHECK(testutil::total_variation(sampled, oracle) < 0.08);
}

TEST_CASE("prior sampling: n = 0 recovers the uniform graph prior (exact backend)") {
    const int p = 3;
    Rng rng = make_stream(41);
    const GWishartParams prior_gw{3.0, Eigen::MatrixXd::Identity(p, p)};
    PosteriorGwParams post{prior_gw.shape, prior_gw.inv_scale};

    NormConstCache cache(prior_gw, 40000, 7);
    BdOptions opts;
    opts.prior_norm = &cache;

    const auto all = testutil::enumerate_graphs(p);
    BdState state;
    state.omega = sample_direct(prior_gw, Graph(p), rng);
    const std::vector<double> sampled = chain_distribution(
        all, state, post, GraphPrior::uniform(), opts, 40000, rng);

    // Uniform over the 8 graphs implies inclusion probability 1/2 per edge.
    double p01 = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i].has_edge(0, 1)) p01 += sampled[i];
    CHECK(std::abs(p01 - 0.5) < 0.04);
    for (double m : sampled) CHECK(std::abs(m - 0.125) < 0.04);
}

TEST_CASE("default backend matches an add-delete MH oracle on its own target") {
    // Without the prior-constant ratio the stationary graph law is
    // proportional to pi(G) I_G(d+n, D+U); an independent Metropolis sampler
    // over graphs with Monte Carlo constants targets the same law.
    const int p = 3, n = 30;
    Rng rng = make_stream(4242);
    Graph truth(p);
    truth.add_edge(1, 2);
    const Eigen::MatrixXd u = synthetic_scatter(p, n, truth, rng);
    const GWishartParams prior_gw{3.0, Eigen::MatrixXd::Identity(p, p)};
    PosteriorGwParams post{3.0 + n, Eigen::MatrixXd::Identity(p, p) + u};
    const GraphPrior prior = GraphPrior::uniform();

    const auto all = testutil::enumerate_graphs(p);
    const std::vector<double> mh_target =
        enumeration_oracle(all, prior_gw, post, prior, 40000,
                           /*include_prior_const=*/false);

    BdState state;
    state.omega = sample_direct(post.as_gwishart(), Graph(p), rng);
    const std::vector<double> sampled = chain_distribution(
        all, state, post, prior, BdOptions{}, 30000, rng);

    // Metropolis random walk over graphs using the same enumeration weights
    // would be exact; instead run it as an honest chain to double-check the
    // normalizing-constant route.
    std::vector<double> mh_mass(all.size(), 0.0);
    NormConstCache post_cache(post.as_gwishart(), 40000, 22);
    Graph g(p);
    for (int t = 0; t < 60000; ++t) {
        const int j = static_cast<int>(draw_uniform(rng, 0, p - 1e-12));
        int k = static_cast<int>(draw_uniform(rng, 0, p - 1 - 1e-12));
        if (k >= j) ++k;
        Graph proposal = g;
        if (proposal.has_edge(j, k))
            proposal.remove_edge(j, k);
        else
            proposal.add_edge(j, k);
        const double log_ratio = log_prior(prior, proposal) - log_prior(prior, g) +
                                 post_cache.log_const(proposal) -
                                 post_cache.log_const(g);
        if (std::log(draw_uniform(rng)) < log_ratio) g = proposal;
        mh_mass[graph_index(all, g)] += 1.0;
    }
    for (double& m : mh_mass) m /= 60000.0;

    CHECK(testutil::total_variation(sampled, mh_target) < 0.08);
    CHECK(testutil::total_variation(mh_mass, mh_target) < 0.08);
}
