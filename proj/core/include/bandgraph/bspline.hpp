#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace bandgraph {

/// Clamped cubic B-spline basis over [domain_lo, domain_hi] with n_basis
/// functions. Interior knots are equally spaced.
struct BasisSpec {
    double domain_lo = 0.0;
    double domain_hi = 1.0;
    int n_basis = 4;
    int degree = 3;

    void validate() const;
};

/// Basis functions evaluated on an ascending grid: values(l, j) = phi_j(s_l).
struct DesignMatrix {
    Eigen::MatrixXd values;             // r x p
    std::vector<double> grid;           // r ascending points

    int n_points() const { return static_cast<int>(grid.size()); }
    int n_basis() const { return static_cast<int>(values.cols()); }
};

/// Clamped knot vector: degree+1 copies of each endpoint, interior knots
/// equally spaced. Length n_basis + degree + 1.
std::vector<double> make_knots(const BasisSpec& spec);

/// All basis functions at a single point (Cox-de Boor recursion).
/// Nonnegative, sums to 1, at most degree+1 nonzero entries.
Eigen::VectorXd eval_basis(const BasisSpec& spec, double s);

DesignMatrix build_design(const BasisSpec& spec, const std::vector<double>& grid);

/// Greville abscissa of each basis function (knot averages); ascending.
std::vector<double> greville_abscissae(const BasisSpec& spec);

/// Sub-interval of the domain represented by coefficient j (0-based).
/// Intervals are delimited by midpoints between consecutive Greville
/// abscissae, so the n_basis intervals tile [domain_lo, domain_hi].
std::pair<double, double> band_of_node(const BasisSpec& spec, int j);

}  // namespace bandgraph
