#include "bandgraph/gwishart.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bandgraph/errors.hpp"

namespace bandgraph {

namespace {

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericError(std::string(what) + ": matrix is not positive definite");
    Eigen::MatrixXd inv =
        llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

double spd_logdet(const Eigen::MatrixXd& m, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericError(std::string(what) + ": matrix is not positive definite");
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

void GWishartParams::validate(int n_nodes) const {
    if (!(shape > 2.0))
        throw InputError("GWishartParams: shape must be > 2");
    if (inv_scale.rows() != n_nodes || inv_scale.cols() != n_nodes)
        throw InputError("GWishartParams: inv_scale dimension mismatch");
    if (!inv_scale.isApprox(inv_scale.transpose(), 1e-10))
        throw InputError("GWishartParams: inv_scale must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(inv_scale);
    if (llt.info() != Eigen::Success)
        throw InputError("GWishartParams: inv_scale must be positive definite");
}

void validate_precision(const PrecisionMatrix& omega, double sym_tol) {
    const int p = omega.graph.n_nodes();
    if (omega.values.rows() != p || omega.values.cols() != p)
        throw InputError("PrecisionMatrix: dimension mismatch with graph");
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) {
            if (std::abs(omega.values(j, k) - omega.values(k, j)) > sym_tol)
                throw NumericError("PrecisionMatrix: asymmetric values");
            if (!omega.graph.has_edge(j, k) &&
                (omega.values(j, k) != 0.0 || omega.values(k, j) != 0.0))
                throw NumericError("PrecisionMatrix: nonzero entry on a non-edge");
        }
    Eigen::LLT<Eigen::MatrixXd> llt(omega.values);
    if (llt.info() != Eigen::Success)
        throw NumericError("PrecisionMatrix: values are not positive definite");
}

double log_density_unnorm(const GWishartParams& params, const PrecisionMatrix& omega) {
    // Any shape is a valid kernel exponent here; the d > 2 invariant is
    // enforced where draws are produced.
    if (params.inv_scale.rows() != omega.graph.n_nodes() ||
        params.inv_scale.cols() != omega.graph.n_nodes())
        throw InputError("log_density_unnorm: inv_scale dimension mismatch");
    const double logdet = spd_logdet(omega.values, "log_density_unnorm");
    const double trace = omega.values.cwiseProduct(params.inv_scale).sum();
    return 0.5 * (params.shape - 2.0) * logdet - 0.5 * trace;
}

Eigen::MatrixXd sample_wishart(double dof, const Eigen::MatrixXd& scale, Rng& rng) {
    const int p = static_cast<int>(scale.rows());
    if (!(dof > p - 1))
        throw InputError("sample_wishart: dof must exceed p - 1");
    Eigen::LLT<Eigen::MatrixXd> llt(scale);
    if (llt.info() != Eigen::Success)
        throw NumericError("sample_wishart: scale is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();

    // Bartlett factor: chi-distributed diagonal, standard normal below.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        A(i, i) = std::sqrt(draw_chisq(rng, dof - i));
        for (int j = 0; j < i; ++j) A(i, j) = draw_normal(rng);
    }
    const Eigen::MatrixXd LA = L * A;
    return LA * LA.transpose();
}

PrecisionMatrix complete_matrix(const Eigen::MatrixXd& sigma, const Graph& g,
                                double tol, int max_iter) {
    const int p = g.n_nodes();
    if (sigma.rows() != p || sigma.cols() != p)
        throw InputError("complete_matrix: sigma dimension mismatch with graph");

    Eigen::MatrixXd W = 0.5 * (sigma + sigma.transpose());
    double delta = 0.0;
    bool converged = false;
    for (int iter = 0; iter < max_iter && !converged; ++iter) {
        delta = 0.0;
        for (int j = 0; j < p; ++j) {
            const auto& nbrs = g.neighbors(j);
            const int m = static_cast<int>(nbrs.size());
            if (m == 0) {
                for (int k = 0; k < p; ++k) {
                    if (k == j) continue;
                    delta = std::max(delta, std::abs(W(k, j)));
                    W(k, j) = W(j, k) = 0.0;
                }
                continue;
            }
            Eigen::MatrixXd A(m, m);
            Eigen::VectorXd b(m);
            for (int r = 0; r < m; ++r) {
                b[r] = sigma(nbrs[r], j);
                for (int c = 0; c < m; ++c) A(r, c) = W(nbrs[r], nbrs[c]);
            }
            const Eigen::VectorXd beta = A.llt().solve(b);
            for (int k = 0; k < p; ++k) {
                if (k == j) continue;
                double val = 0.0;
                for (int r = 0; r < m; ++r) val += W(k, nbrs[r]) * beta[r];
                delta = std::max(delta, std::abs(val - W(k, j)));
                W(k, j) = W(j, k) = val;
            }
        }
        converged = delta < tol;
    }
    if (!converged)
        throw ConvergenceError("complete_matrix: no convergence within max_iter",
                               delta);

    // Recover the precision from the converged regressions; structural zeros
    // are exact by construction.
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j) {
        const auto& nbrs = g.neighbors(j);
        const int m = static_cast<int>(nbrs.size());
        if (m == 0) {
            omega(j, j) = 1.0 / W(j, j);
            continue;
        }
        Eigen::MatrixXd A(m, m);
        Eigen::VectorXd b(m);
        for (int r = 0; r < m; ++r) {
            b[r] = W(nbrs[r], j);
            for (int c = 0; c < m; ++c) A(r, c) = W(nbrs[r], nbrs[c]);
        }
        const Eigen::VectorXd beta = A.llt().solve(b);
        const double cond = W(j, j) - b.dot(beta);
        if (!(cond > 0.0))
            throw NumericError("complete_matrix: nonpositive conditional variance");
        const double ojj = 1.0 / cond;
        omega(j, j) = ojj;
        for (int r = 0; r < m; ++r) omega(nbrs[r], j) = -beta[r] * ojj;
    }
    omega = (0.5 * (omega + omega.transpose())).eval();

    PrecisionMatrix result{std::move(omega), g};
    Eigen::LLT<Eigen::MatrixXd> llt(result.values);
    if (llt.info() != Eigen::Success)
        throw NumericError("complete_matrix: completed matrix is not positive definite");
    return result;
}

PrecisionMatrix sample_direct(const GWishartParams& params, const Graph& g, Rng& rng) {
    const int p = g.n_nodes();
    params.validate(p);
    const Eigen::MatrixXd scale = spd_inverse(params.inv_scale, "sample_direct");
    const Eigen::MatrixXd draw = sample_wishart(params.shape + p - 1, scale, rng);
    const Eigen::MatrixXd sigma = spd_inverse(draw, "sample_direct");
    return complete_matrix(sigma, g);
}

LogNormConst log_normconst_mc(const GWishartParams& params, const Graph& g,
                              int n_samples, Rng& rng) {
    const int p = g.n_nodes();
    params.validate(p);
    if (p > 12)
        throw InputError("log_normconst_mc: unsupported for p > 12");
    if (n_samples < 1000)
        throw InputError("log_normconst_mc: need at least 1000 samples");

    const Eigen::MatrixXd sigma = spd_inverse(params.inv_scale, "log_normconst_mc");
    // Upper-triangular T with sigma = T^T T.
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw NumericError("log_normconst_mc: inv_scale inverse not positive definite");
    const Eigen::MatrixXd T = llt.matrixL().toDenseMatrix().transpose();

    // nu[i]: neighbors after i; nbar[i]: neighbors before i.
    std::vector<int> nu(p, 0), nbar(p, 0);
    for (int i = 0; i < p; ++i)
        for (int k : g.neighbors(i)) {
            if (k > i) ++nu[i];
            else ++nbar[i];
        }

    const double d = params.shape;
    double const_part = 0.5 * g.n_edges() * std::log(2.0 * std::numbers::pi);
    for (int i = 0; i < p; ++i) {
        const double a = 0.5 * (d + nu[i]);
        const_part += a * std::log(2.0) + std::lgamma(a) +
                      (d + nu[i] + nbar[i]) * std::log(T(i, i));
    }

    const int n_nonfree = g.max_edges() - g.n_edges();
    if (n_nonfree == 0)
        return {const_part, 0.0};   // complete graph: correction term is exactly 1

    // Correction term: E[exp(-sum of squared non-free Cholesky elements / 2)]
    // with free elements sampled from the importance law.
    std::vector<double> log_x(n_samples);
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(p, p);
    for (int s = 0; s < n_samples; ++s) {
        double ss = 0.0;
        for (int i = 0; i < p; ++i) {
            psi(i, i) = std::sqrt(draw_chisq(rng, d + nu[i]));
            phi(i, i) = psi(i, i) * T(i, i);
            for (int j = i + 1; j < p; ++j) {
                if (g.has_edge(i, j)) {
                    psi(i, j) = draw_normal(rng);
                    double acc = 0.0;
                    for (int k = i; k <= j; ++k) acc += psi(i, k) * T(k, j);
                    phi(i, j) = acc;
                } else {
                    double acc = 0.0;
                    for (int k = 0; k < i; ++k) acc += phi(k, i) * phi(k, j);
                    phi(i, j) = -acc / phi(i, i);
                    double proj = 0.0;
                    for (int k = i; k < j; ++k) proj += psi(i, k) * T(k, j);
                    psi(i, j) = (phi(i, j) - proj) / T(j, j);
                    ss += psi(i, j) * psi(i, j);
                }
            }
        }
        log_x[s] = -0.5 * ss;
    }

    const double m = *std::max_element(log_x.begin(), log_x.end());
    double sum_y = 0.0, sum_y2 = 0.0;
    for (double lx : log_x) {
        const double y = std::exp(lx - m);
        sum_y += y;
        sum_y2 += y * y;
    }
    const double mean_y = sum_y / n_samples;
    const double var_y =
        std::max(0.0, sum_y2 / n_samples - mean_y * mean_y) *
        (static_cast<double>(n_samples) / std::max(1, n_samples - 1));
    const double se = std::sqrt(var_y / n_samples) / mean_y;
    return {const_part + m + std::log(mean_y), se};
}

NormConstCache::NormConstCache(GWishartParams params, int n_samples,
                               std::uint64_t seed)
    : params_(std::move(params)), n_samples_(n_samples), seed_(seed) {}

double NormConstCache::log_const(const Graph& g) const {
    const auto key = g.edge_bits();
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Rng rng = make_stream(seed_, g.hash());
    const double value = log_normconst_mc(params_, g, n_samples_, rng).estimate;
    cache_.emplace(key, value);
    return value;
}

}  // namespace bandgraph
