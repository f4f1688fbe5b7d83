#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "bandgraph/graph.hpp"
#include "bandgraph/rng.hpp"

namespace bandgraph {

/// Parameters of the G-Wishart law with kernel
///   |Omega|^((shape-2)/2) * exp(-tr(Omega * inv_scale)/2),  shape > 2.
/// On the complete graph this is a Wishart with shape+p-1 degrees of
/// freedom and scale inv_scale^{-1}.
struct GWishartParams {
    double shape = 3.0;
    Eigen::MatrixXd inv_scale;

    void validate(int n_nodes) const;
};

/// Symmetric positive-definite matrix with exact zeros on the non-edges of
/// its graph.
struct PrecisionMatrix {
    Eigen::MatrixXd values;
    Graph graph;
};

/// Throws unless `omega` is symmetric, positive definite, and carries exact
/// zeros on every non-edge of its graph.
void validate_precision(const PrecisionMatrix& omega, double sym_tol = 1e-12);

/// ((shape-2)/2) log|Omega| - tr(Omega * inv_scale)/2.
double log_density_unnorm(const GWishartParams& params, const PrecisionMatrix& omega);

/// Standard Wishart(dof, scale) draw via Bartlett decomposition; mean is
/// dof * scale. Requires dof > p - 1.
Eigen::MatrixXd sample_wishart(double dof, const Eigen::MatrixXd& scale, Rng& rng);

/// Positive-definite completion: finds Omega in P_G with
/// (Omega^{-1})[j,k] = sigma[j,k] on edges and the diagonal, by cyclic
/// blockwise regression on each node's neighborhood. Non-neighbor partial
/// covariances are zeroed exactly.
PrecisionMatrix complete_matrix(const Eigen::MatrixXd& sigma, const Graph& g,
                                double tol = 1e-8, int max_iter = 1000);

/// Exact G-Wishart draw: unconstrained Wishart draw with the same (shape,
/// inv_scale) parameterization, inverted and completed against the graph.
PrecisionMatrix sample_direct(const GWishartParams& params, const Graph& g, Rng& rng);

struct LogNormConst {
    double estimate = 0.0;   // log I_G(shape, inv_scale)
    double std_error = 0.0;  // delta-method standard error on the log scale
};

/// Monte Carlo estimate of the log normalizing constant via the Cholesky
/// importance decomposition: free off-diagonal elements of the Cholesky
/// factor are standard normal, free diagonal elements chi-distributed, and
/// the exponential correction from the completed non-free elements is
/// averaged. Guarded to p <= 12.
LogNormConst log_normconst_mc(const GWishartParams& params, const Graph& g,
                              int n_samples, Rng& rng);

/// Memoized log I_G(shape, inv_scale) for small graphs. Each graph gets a
/// deterministic RNG stream derived from (seed, graph hash), so cached
/// values do not depend on query order. Not thread-safe; keep one per chain.
class NormConstCache {
public:
    NormConstCache(GWishartParams params, int n_samples, std::uint64_t seed);

    double log_const(const Graph& g) const;
    const GWishartParams& params() const { return params_; }

private:
    GWishartParams params_;
    int n_samples_;
    std::uint64_t seed_;
    mutable std::map<std::vector<std::uint64_t>, double> cache_;
};

}  // namespace bandgraph
