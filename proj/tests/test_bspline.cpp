#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bandgraph/bspline.hpp"
#include "bandgraph/errors.hpp"
#include "bandgraph/rng.hpp"

using namespace bandgraph;

TEST_CASE("make_knots: clamped with equally spaced interior") {
    SUBCASE("no interior knots when p = degree + 1") {
        const auto knots = make_knots({0.0, 1.0, 4, 3});
        const std::vector<double> want{0, 0, 0, 0, 1, 1, 1, 1};
        REQUIRE(knots == want);
    }
    SUBCASE("single interior knot at the midpoint") {
        const auto knots = make_knots({0.0, 1.0, 5, 3});
        const std::vector<double> want{0, 0, 0, 0, 0.5, 1, 1, 1, 1};
        REQUIRE(knots.size() == 9);
        for (std::size_t i = 0; i < want.size(); ++i)
            CHECK(knots[i] == doctest::Approx(want[i]).epsilon(1e-15));
    }
    SUBCASE("two interior knots on [0,2]") {
        const auto knots = make_knots({0.0, 2.0, 6, 3});
        REQUIRE(knots.size() == 10);
        CHECK(knots[4] == doctest::Approx(2.0 / 3.0));
        CHECK(knots[5] == doctest::Approx(4.0 / 3.0));
    }
    SUBCASE("rejects too few basis functions") {
        CHECK_THROWS_AS(make_knots({0.0, 1.0, 3, 3}), InputError);
    }
    SUBCASE("rejects inverted domain") {
        CHECK_THROWS_AS(make_knots({1.0, 0.0, 5, 3}), InputError);
    }
}

TEST_CASE("eval_basis: endpoint interpolation and a hand-computed value") {
    const BasisSpec spec{0.0, 1.0, 4, 3};
    SUBCASE("left endpoint gives e_1") {
        const Eigen::VectorXd v = eval_basis(spec, 0.0);
        CHECK(v[0] == doctest::Approx(1.0));
        CHECK(v.tail(3).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    }
    SUBCASE("right endpoint gives e_p") {
        const Eigen::VectorXd v = eval_basis(spec, 1.0);
        CHECK(v[3] == doctest::Approx(1.0));
        CHECK(v.head(3).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    }
    SUBCASE("midpoint of a single cubic segment") {
        const Eigen::VectorXd v = eval_basis(spec, 0.5);
        CHECK(v[0] == doctest::Approx(0.125).epsilon(1e-12));
        CHECK(v[1] == doctest::Approx(0.375).epsilon(1e-12));
        CHECK(v[2] == doctest::Approx(0.375).epsilon(1e-12));
        CHECK(v[3] == doctest::Approx(0.125).epsilon(1e-12));
    }
    SUBCASE("out of domain throws") {
        CHECK_THROWS_AS(eval_basis(spec, -0.01), InputError);
        CHECK_THROWS_AS(eval_basis(spec, 1.01), InputError);
    }
}

TEST_CASE("basis properties: partition of unity, locality, nonnegativity") {
    const BasisSpec spec{-1.5, 3.0, 11, 3};
    Rng rng = make_stream(17);
    for (int trial = 0; trial < 10000; ++trial) {
        const double s = draw_uniform(rng, spec.domain_lo, spec.domain_hi);
        const Eigen::VectorXd v = eval_basis(spec, s);
        REQUIRE(std::abs(v.sum() - 1.0) < 1e-12);
        REQUIRE(v.minCoeff() >= 0.0);
        int first = -1, last = -1, count = 0;
        for (int j = 0; j < spec.n_basis; ++j)
            if (v[j] > 0.0) {
                if (first < 0) first = j;
                last = j;
                ++count;
            }
        REQUIRE(count <= 4);
        REQUIRE(last - first + 1 == count);  // contiguous support
    }
}

TEST_CASE("build_design") {
    SUBCASE("rows equal pointwise evaluations, row sums are 1") {
        const BasisSpec spec{0.0, 1.0, 7, 3};
        std::vector<double> grid;
        for (int l = 0; l < 41; ++l) grid.push_back(l / 40.0);
        const DesignMatrix dm = build_design(spec, grid);
        REQUIRE(dm.values.rows() == 41);
        REQUIRE(dm.values.cols() == 7);
        for (int l = 0; l < 41; ++l) {
            CHECK((dm.values.row(l).transpose() - eval_basis(spec, grid[l]))
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
            CHECK(dm.values.row(l).sum() == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(dm.values.minCoeff() >= 0.0);
        CHECK(dm.values.maxCoeff() <= 1.0);
    }
    SUBCASE("single-point grid at the left endpoint") {
        const DesignMatrix dm = build_design({0.0, 1.0, 5, 3}, {0.0});
        CHECK(dm.values(0, 0) == doctest::Approx(1.0));
        CHECK(dm.values.row(0).tail(4).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("non-ascending grid throws") {
        CHECK_THROWS_AS(build_design({0.0, 1.0, 5, 3}, {0.1, 0.1, 0.2}), InputError);
    }
    SUBCASE("235 x 40 spectral-scale design") {
        const BasisSpec spec{600.0, 1900.0, 40, 3};
        std::vector<double> grid;
        for (int l = 0; l < 235; ++l) grid.push_back(600.0 + l * (1300.0 / 234.0));
        const DesignMatrix dm = build_design(spec, grid);
        REQUIRE(dm.values.rows() == 235);
        REQUIRE(dm.values.cols() == 40);
        for (int l = 0; l < 235; ++l)
            REQUIRE(dm.values.row(l).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("band_of_node: Greville midpoint tiling") {
    const BasisSpec spec{0.0, 1.0, 4, 3};
    SUBCASE("known bands for the single-segment basis") {
        const auto [l0, h0] = band_of_node(spec, 0);
        const auto [l1, h1] = band_of_node(spec, 1);
        const auto [l2, h2] = band_of_node(spec, 2);
        const auto [l3, h3] = band_of_node(spec, 3);
        CHECK(l0 == doctest::Approx(0.0));
        CHECK(h0 == doctest::Approx(1.0 / 6.0));
        CHECK(h1 == doctest::Approx(0.5));
        CHECK(h2 == doctest::Approx(5.0 / 6.0));
        CHECK(l3 == doctest::Approx(5.0 / 6.0));
        CHECK(h3 == doctest::Approx(1.0));
    }
    SUBCASE("bands tile the domain") {
        const BasisSpec wide{-2.0, 7.0, 13, 3};
        double cursor = wide.domain_lo;
        for (int j = 0; j < wide.n_basis; ++j) {
            const auto [lo, hi] = band_of_node(wide, j);
            CHECK(lo == doctest::Approx(cursor).epsilon(1e-12));
            CHECK(hi > lo);
            cursor = hi;
        }
        CHECK(cursor == doctest::Approx(wide.domain_hi));
    }
    SUBCASE("symmetric spec gives reflection-symmetric bands") {
        const BasisSpec sym{0.0, 1.0, 9, 3};
        for (int j = 0; j < sym.n_basis; ++j) {
            const auto [lo, hi] = band_of_node(sym, j);
            const auto [rlo, rhi] = band_of_node(sym, sym.n_basis - 1 - j);
            CHECK(lo == doctest::Approx(1.0 - rhi).epsilon(1e-12));
            CHECK(hi == doctest::Approx(1.0 - rlo).epsilon(1e-12));
        }
    }
    SUBCASE("index out of range") {
        CHECK_THROWS_AS(band_of_node(spec, 4), InputError);
        CHECK_THROWS_AS(band_of_node(spec, -1), InputError);
    }
}
