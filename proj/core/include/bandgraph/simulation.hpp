#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bandgraph/dataset.hpp"
#include "bandgraph/gibbs.hpp"
#include "bandgraph/graph.hpp"
#include "bandgraph/rng.hpp"

namespace bandgraph {

enum class ExperimentKind { Nonstructured, Clustered, GpMatern };

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Nonstructured;
    int p = 40;
    int n = 200;
    int r = 200;
    double domain_lo = 0.0;
    double domain_hi = 1.0;
    double sparsity = 0.3;
    double tau2_true = 0.01;   // observation noise; nugget for the GP case
    double gw_d = 3.0;         // generator G-Wishart shape
    double gw_d_scale = 1.0;   // generator inverse scale D = c * I
    int n_blocks = 4;          // clustered case
    double gp_mean_amp = 3.0;  // mean curve amp * sin(freq * t)
    double gp_mean_freq = 4.0;
    double gp_rho = 0.5;
    double gp_nu = 0.5;
    double gp_var = 5.0;
    int n_replicates = 50;
    std::uint64_t seed = 0;
    bool freeze_truth = false;  // keep one (graph, Omega, beta) across replicates

    void validate() const;
};

/// Dataset plus the generating truth for scoring.
struct SyntheticDataset {
    SpectraDataset data;
    Graph true_graph;
    Eigen::MatrixXd true_omega;        // p x p
    Eigen::MatrixXd true_betas;        // n x p
    Eigen::MatrixXd sigma_true_grid;   // GP case: r x r
    Eigen::MatrixXd sigma_true_coef;   // GP case: p x p projection
};

/// Graph ~ edgewise Bernoulli(sparsity); Omega ~ G-Wishart(gw_d, c*I) | G;
/// beta_i ~ N(0, Omega^{-1}); Y_i = Phi beta_i + noise.
SyntheticDataset gen_experiment1(const ExperimentSpec& spec, Rng& rng);

/// As experiment 1 with edges restricted to the given node blocks.
SyntheticDataset gen_experiment2(const ExperimentSpec& spec,
                                 const std::vector<std::vector<int>>& blocks,
                                 Rng& rng);

/// Matern correlation (Gamma(nu) 2^(nu-1))^{-1} (sqrt(2 nu) d / rho)^nu
/// K_nu(sqrt(2 nu) d / rho); equals 1 at d = 0 and exp(-d/rho) at nu = 1/2.
double matern(double dist, double rho, double nu);

/// Curves from a Gaussian process with mean amp*sin(freq t) and covariance
/// gp_var * Matern(|s-t|), plus iid noise of variance tau2_true. The truth
/// stores the grid covariance and its least-squares projection onto the
/// p-dimensional coefficient space.
SyntheticDataset gen_gp_dataset(const ExperimentSpec& spec, Rng& rng);

/// 0.5 [ tr(sigma_true^{-1} sigma_hat) - p - log(|sigma_hat|/|sigma_true|) ].
double kl_divergence(const Eigen::MatrixXd& sigma_true,
                     const Eigen::MatrixXd& sigma_hat);

/// Root mean squared elementwise difference.
double rmse_curves(const Eigen::MatrixXd& fitted, const Eigen::MatrixXd& truth);

struct ReplicateMetrics {
    int replicate = 0;
    double shd_median = std::numeric_limits<double>::quiet_NaN();
    double shd_bfdr = std::numeric_limits<double>::quiet_NaN();
    double kl = std::numeric_limits<double>::quiet_NaN();
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double runtime_s = 0.0;
    bool failed = false;
    std::string error;
};

struct ReplicateReport {
    std::vector<ReplicateMetrics> replicates;

    std::vector<double> collect(const std::string& metric) const;
};

struct SimControls {
    SamplerControls sampler;
    double select_alpha = 0.05;
    int jobs = 1;
};

/// Generate, fit, summarize, and score each replicate. Standardized SHD for
/// both selection rules on the structural experiments; KL and curve RMSE on
/// the GP comparison. Failures are recorded and the run continues. When
/// out_dir is nonempty, writes metrics.csv and aggregate.csv there.
ReplicateReport run_replicates(const ExperimentSpec& spec, const Hyperparameters& hp,
                               const SimControls& controls,
                               const std::string& out_dir = "");

void write_replicate_report(const ReplicateReport& report, const std::string& dir);

}  // namespace bandgraph
