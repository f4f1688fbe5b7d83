#include "bandgraph/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bandgraph/errors.hpp"

namespace bandgraph {

void BasisSpec::validate() const {
    if (!(domain_lo < domain_hi))
        throw InputError("BasisSpec: domain_lo must be < domain_hi");
    if (degree != 3)
        throw InputError("BasisSpec: only cubic bases (degree 3) are supported");
    if (n_basis < degree + 1) {
        std::ostringstream os;
        os << "BasisSpec: n_basis = " << n_basis << " must be >= degree+1 = "
           << degree + 1;
        throw InputError(os.str());
    }
}

std::vector<double> make_knots(const BasisSpec& spec) {
    spec.validate();
    const int p = spec.n_basis;
    const int k = spec.degree;
    const int n_interior = p - k - 1;
    std::vector<double> knots;
    knots.reserve(p + k + 1);
    for (int i = 0; i <= k; ++i) knots.push_back(spec.domain_lo);
    for (int i = 1; i <= n_interior; ++i) {
        const double t = static_cast<double>(i) / (n_interior + 1);
        knots.push_back(spec.domain_lo + t * (spec.domain_hi - spec.domain_lo));
    }
    for (int i = 0; i <= k; ++i) knots.push_back(spec.domain_hi);
    return knots;
}

namespace {

// Index of the knot span containing s: largest i with knots[i] <= s and
// knots[i] < knots[i+1]. s == domain_hi is assigned to the last span.
int find_span(const std::vector<double>& knots, int degree, int n_basis, double s) {
    const int last = n_basis - 1;            // last valid span start
    if (s >= knots[n_basis]) return last;    // right endpoint
    int lo = degree, hi = n_basis;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (s < knots[mid])
            hi = mid;
        else
            lo = mid;
    }
    return lo;
}

}  // namespace

Eigen::VectorXd eval_basis(const BasisSpec& spec, double s) {
    spec.validate();
    if (s < spec.domain_lo || s > spec.domain_hi) {
        std::ostringstream os;
        os << "eval_basis: s = " << s << " outside [" << spec.domain_lo << ", "
           << spec.domain_hi << "]";
        throw InputError(os.str());
    }
    const int p = spec.n_basis;
    const int k = spec.degree;
    const std::vector<double> knots = make_knots(spec);
    const int span = find_span(knots, k, p, s);

    // Cox-de Boor triangle for the k+1 basis functions alive on this span.
    std::vector<double> local(k + 1, 0.0), left(k + 1), right(k + 1);
    local[0] = 1.0;
    for (int j = 1; j <= k; ++j) {
        left[j] = s - knots[span + 1 - j];
        right[j] = knots[span + j] - s;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = local[r] / (right[r + 1] + left[j - r]);
            local[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        local[j] = saved;
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
    for (int j = 0; j <= k; ++j) out[span - k + j] = local[j];
    return out;
}

DesignMatrix build_design(const BasisSpec& spec, const std::vector<double>& grid) {
    spec.validate();
    if (grid.empty()) throw InputError("build_design: empty grid");
    for (std::size_t l = 1; l < grid.size(); ++l)
        if (!(grid[l] > grid[l - 1]))
            throw InputError("build_design: grid must be strictly ascending");
    if (grid.front() < spec.domain_lo || grid.back() > spec.domain_hi)
        throw InputError("build_design: grid extends outside the basis domain");

    DesignMatrix dm;
    dm.grid = grid;
    dm.values.resize(static_cast<int>(grid.size()), spec.n_basis);
    for (std::size_t l = 0; l < grid.size(); ++l)
        dm.values.row(static_cast<int>(l)) = eval_basis(spec, grid[l]).transpose();
    return dm;
}

std::vector<double> greville_abscissae(const BasisSpec& spec) {
    const std::vector<double> knots = make_knots(spec);
    const int p = spec.n_basis;
    const int k = spec.degree;
    std::vector<double> xi(p);
    for (int j = 0; j < p; ++j) {
        double acc = 0.0;
        for (int m = 1; m <= k; ++m) acc += knots[j + m];
        xi[j] = acc / k;
    }
    return xi;
}

std::pair<double, double> band_of_node(const BasisSpec& spec, int j) {
    spec.validate();
    if (j < 0 || j >= spec.n_basis)
        throw InputError("band_of_node: node index out of range");
    const std::vector<double> xi = greville_abscissae(spec);
    const double lo = (j == 0) ? spec.domain_lo : 0.5 * (xi[j - 1] + xi[j]);
    const double hi =
        (j == spec.n_basis - 1) ? spec.domain_hi : 0.5 * (xi[j] + xi[j + 1]);
    return {lo, hi};
}

}  // namespace bandgraph
