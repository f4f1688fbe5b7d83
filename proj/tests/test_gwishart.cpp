#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bandgraph/errors.hpp"
#include "bandgraph/gwishart.hpp"
#include "test_helpers.hpp"

using namespace bandgraph;

namespace {

Graph chain_graph(int p) {
    Graph g(p);
    for (int j = 0; j + 1 < p; ++j) g.add_edge(j, j + 1);
    return g;
}

Graph complete_graph(int p) {
    Graph g(p);
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) g.add_edge(j, k);
    return g;
}

}  // namespace

TEST_CASE("log_density_unnorm") {
    SUBCASE("identity inputs") {
        const int p = 5;
        PrecisionMatrix omega{Eigen::MatrixXd::Identity(p, p), complete_graph(p)};
        // d = 2 zeroes the determinant exponent, leaving -tr/2
        CHECK(log_density_unnorm({2.0, Eigen::MatrixXd::Identity(p, p)}, omega) ==
              doctest::Approx(-p / 2.0));
        PrecisionMatrix omega2{Eigen::MatrixXd::Identity(2, 2), complete_graph(2)};
        CHECK(log_density_unnorm({3.0, Eigen::MatrixXd::Identity(2, 2)}, omega2) ==
              doctest::Approx(-1.0));
    }
    SUBCASE("doubling D subtracts tr(Omega D)/2") {
        Rng rng = make_stream(2);
        const int p = 4;
        const Eigen::MatrixXd d = testutil::random_spd(p, rng);
        PrecisionMatrix omega{testutil::random_spd(p, rng), complete_graph(p)};
        const double base = log_density_unnorm({4.0, d}, omega);
        const double doubled = log_density_unnorm({4.0, 2.0 * d}, omega);
        CHECK(doubled - base ==
              doctest::Approx(-0.5 * omega.values.cwiseProduct(d).sum()));
    }
    SUBCASE("non positive definite omega") {
        Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
        bad(0, 0) = -1.0;
        PrecisionMatrix omega{bad, complete_graph(3)};
        CHECK_THROWS_AS(log_density_unnorm({3.0, Eigen::MatrixXd::Identity(3, 3)},
                                           omega),
                        NumericError);
    }
}

TEST_CASE("complete_matrix") {
    Rng rng = make_stream(31);
    SUBCASE("complete graph inverts sigma exactly") {
        const Eigen::MatrixXd sigma = testutil::random_spd(5, rng);
        const PrecisionMatrix omega = complete_matrix(sigma, complete_graph(5));
        const Eigen::MatrixXd direct =
            sigma.llt().solve(Eigen::MatrixXd::Identity(5, 5));
        CHECK((omega.values - direct).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("empty graph keeps only reciprocal variances") {
        const Eigen::MatrixXd sigma = testutil::random_spd(4, rng);
        const PrecisionMatrix omega = complete_matrix(sigma, Graph(4));
        for (int j = 0; j < 4; ++j) {
            CHECK(omega.values(j, j) == doctest::Approx(1.0 / sigma(j, j)));
            for (int k = 0; k < 4; ++k)
                if (k != j) CHECK(omega.values(j, k) == 0.0);
        }
    }
    SUBCASE("p=3 chain agrees with the log-det completion oracle") {
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::MatrixXd sigma = testutil::random_spd(3, rng);
            const Graph g = chain_graph(3);
            const PrecisionMatrix omega = complete_matrix(sigma, g);
            CHECK(omega.values(0, 2) == 0.0);

            const Eigen::MatrixXd cov =
                omega.values.llt().solve(Eigen::MatrixXd::Identity(3, 3));
            CHECK(cov(0, 1) == doctest::Approx(sigma(0, 1)).epsilon(1e-7));
            CHECK(cov(1, 2) == doctest::Approx(sigma(1, 2)).epsilon(1e-7));
            for (int j = 0; j < 3; ++j)
                CHECK(cov(j, j) == doctest::Approx(sigma(j, j)).epsilon(1e-7));

            const Eigen::MatrixXd oracle = testutil::completion_oracle(sigma, g);
            CHECK((omega.values - oracle).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    SUBCASE("random graphs: constraints, zeros, idempotence") {
        for (int trial = 0; trial < 15; ++trial) {
            const int p = 6;
            const Graph g = sample_random_graph(p, 0.4, rng);
            const Eigen::MatrixXd sigma = testutil::random_spd(p, rng);
            const PrecisionMatrix omega = complete_matrix(sigma, g);
            validate_precision(omega);

            const Eigen::MatrixXd cov =
                omega.values.llt().solve(Eigen::MatrixXd::Identity(p, p));
            for (int j = 0; j < p; ++j) {
                CHECK(std::abs(cov(j, j) - sigma(j, j)) < 1e-6);
                for (int k : g.neighbors(j))
                    CHECK(std::abs(cov(j, k) - sigma(j, k)) < 1e-6);
            }
            const Eigen::MatrixXd oracle = testutil::completion_oracle(sigma, g);
            CHECK((omega.values - oracle).cwiseAbs().maxCoeff() < 1e-5);

            const PrecisionMatrix again = complete_matrix(cov, g);
            CHECK((again.values - omega.values).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    SUBCASE("non-convergence carries the residual") {
        const Eigen::MatrixXd sigma = testutil::random_spd(5, rng);
        try {
            complete_matrix(sigma, chain_graph(5), 1e-14, 1);
            FAIL("expected ConvergenceError");
        } catch (const ConvergenceError& e) {
            CHECK(e.residual() > 0.0);
        }
    }
}

TEST_CASE("sample_direct") {
    Rng rng = make_stream(101);
    SUBCASE("complete graph matches the Wishart moment map") {
        const int p = 4, n = 4000;
        const GWishartParams params{3.0, Eigen::MatrixXd::Identity(p, p)};
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(p, p);
        for (int s = 0; s < n; ++s)
            mean += sample_direct(params, complete_graph(p), rng).values;
        mean /= n;
        // mean of the kernel on the complete graph is (d + p - 1) D^{-1}
        CHECK((mean - 6.0 * Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() <
              0.35);
    }
    SUBCASE("structural zeros hold exactly on every draw") {
        for (int trial = 0; trial < 10; ++trial) {
            const int p = 6;
            const Graph g = sample_random_graph(p, 0.35, rng);
            const GWishartParams params{3.0, Eigen::MatrixXd::Identity(p, p)};
            for (int s = 0; s < 30; ++s) {
                const PrecisionMatrix omega = sample_direct(params, g, rng);
                validate_precision(omega);
            }
        }
    }
    SUBCASE("empty graph diagonals are chi-squared with d degrees of freedom") {
        const int p = 3, n = 4000;
        const double d = 3.0;
        const GWishartParams params{d, Eigen::MatrixXd::Identity(p, p)};
        std::vector<double> draws;
        draws.reserve(n * p);
        for (int s = 0; s < n; ++s) {
            const PrecisionMatrix omega = sample_direct(params, Graph(p), rng);
            for (int j = 0; j < p; ++j) draws.push_back(omega.values(j, j));
            CHECK(omega.values(0, 1) == 0.0);
        }
        const double pval = testutil::ks_one_sample(
            draws, [d](double x) { return testutil::chisq_cdf(x, d); });
        CHECK(pval > 0.001);
    }
    SUBCASE("scaling D rescales draws as Omega / c") {
        const int p = 3, n = 3000;
        const double c = 2.5;
        Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(p, p);
        Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(p, p);
        const GWishartParams base{4.0, Eigen::MatrixXd::Identity(p, p)};
        const GWishartParams scaled{4.0, c * Eigen::MatrixXd::Identity(p, p)};
        for (int s = 0; s < n; ++s) {
            m1 += sample_direct(base, complete_graph(p), rng).values;
            m2 += sample_direct(scaled, complete_graph(p), rng).values;
        }
        CHECK((m1 / n - c * m2 / n).cwiseAbs().maxCoeff() < 0.4);
    }
    SUBCASE("shape must exceed 2") {
        CHECK_THROWS_AS(
            sample_direct({1.5, Eigen::MatrixXd::Identity(3, 3)}, Graph(3), rng),
            InputError);
    }
}

TEST_CASE("log_normconst_mc") {
    Rng rng = make_stream(202);
    SUBCASE("complete graph: exact closed form, zero correction variance") {
        for (double d : {3.0, 4.5}) {
            const Eigen::MatrixXd D = testutil::random_spd(4, rng);
            Rng local = make_stream(7);
            const LogNormConst est =
                log_normconst_mc({d, D}, complete_graph(4), 2000, local);
            CHECK(est.std_error == 0.0);
            CHECK(est.estimate ==
                  doctest::Approx(testutil::log_normconst_complete(d, D))
                      .epsilon(1e-10));
        }
    }
    SUBCASE("empty graph with a non-diagonal D matches the Gamma product") {
        const Eigen::MatrixXd D = testutil::random_spd(4, rng);
        Rng local = make_stream(8);
        const LogNormConst est = log_normconst_mc({3.0, D}, Graph(4), 40000, local);
        const double want = testutil::log_normconst_empty(3.0, D);
        CHECK(std::abs(est.estimate - want) < 3.0 * std::max(est.std_error, 1e-4));
    }
    SUBCASE("decomposable chain matches the clique/separator factorization") {
        const double d = 3.0;
        const Graph g = chain_graph(4);
        Rng local = make_stream(5);
        const LogNormConst est = log_normconst_mc(
            {d, Eigen::MatrixXd::Identity(4, 4)}, g, 2000, local);
        const double log_k2 =
            testutil::log_normconst_complete(d, Eigen::MatrixXd::Identity(2, 2));
        const double log_k1 =
            testutil::log_normconst_complete(d, Eigen::MatrixXd::Identity(1, 1));
        // chain = three edge cliques over two singleton separators; the
        // estimator is exact here (perfect elimination ordering, D = I)
        CHECK(est.std_error == 0.0);
        CHECK(est.estimate ==
              doctest::Approx(3.0 * log_k2 - 2.0 * log_k1).epsilon(1e-10));
    }
    SUBCASE("4-cycle: seed-invariant within Monte Carlo error") {
        Graph g(4);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        g.add_edge(0, 3);
        const GWishartParams params{3.0, Eigen::MatrixXd::Identity(4, 4)};
        Rng r1 = make_stream(1), r2 = make_stream(99);
        const LogNormConst a = log_normconst_mc(params, g, 50000, r1);
        const LogNormConst b = log_normconst_mc(params, g, 50000, r2);
        CHECK(a.std_error > 0.0);
        CHECK(std::abs(a.estimate - b.estimate) <
              4.0 * (a.std_error + b.std_error));
    }
    SUBCASE("4-cycle: invariant to node relabeling") {
        Graph g(4);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        g.add_edge(0, 3);
        // same cycle traversed in the order 0,2,1,3
        Graph relabeled(4);
        relabeled.add_edge(0, 2);
        relabeled.add_edge(1, 2);
        relabeled.add_edge(1, 3);
        relabeled.add_edge(0, 3);
        const GWishartParams params{3.0, Eigen::MatrixXd::Identity(4, 4)};
        Rng r1 = make_stream(3), r2 = make_stream(4);
        const LogNormConst a = log_normconst_mc(params, g, 80000, r1);
        const LogNormConst b = log_normconst_mc(params, relabeled, 80000, r2);
        CHECK(std::abs(a.estimate - b.estimate) <
              4.0 * (a.std_error + b.std_error));
    }
    SUBCASE("guards") {
        Rng local = make_stream(1);
        CHECK_THROWS_AS(
            log_normconst_mc({3.0, Eigen::MatrixXd::Identity(13, 13)}, Graph(13),
                             2000, local),
            InputError);
        CHECK_THROWS_AS(log_normconst_mc({3.0, Eigen::MatrixXd::Identity(3, 3)},
                                         Graph(3), 500, local),
                        InputError);
    }
}

TEST_CASE("NormConstCache is deterministic and order-independent") {
    const GWishartParams params{3.0, Eigen::MatrixXd::Identity(3, 3)};
    const auto graphs = testutil::enumerate_graphs(3);
    NormConstCache c1(params, 5000, 42);
    NormConstCache c2(params, 5000, 42);
    std::vector<double> v1, v2;
    for (const auto& g : graphs) v1.push_back(c1.log_const(g));
    for (auto it = graphs.rbegin(); it != graphs.rend(); ++it)
        v2.push_back(c2.log_const(*it));
    for (std::size_t i = 0; i < graphs.size(); ++i)
        CHECK(v1[i] == v2[graphs.size() - 1 - i]);
    // cached second lookups return the same value
    CHECK(c1.log_const(graphs[3]) == v1[3]);
}
