#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>

#include "bandgraph/dataset.hpp"
#include "bandgraph/gibbs.hpp"
#include "bandgraph/graph.hpp"

namespace bandgraph {

struct LoadOptions {
    bool normalize_area = false;
    // When nonempty, the first CSV column is a label; only rows whose label
    // equals the filter are kept.
    std::string label_filter;
};

/// Wide CSV: first row is the wavelength grid, each subsequent row one
/// curve. Parse errors carry the row/column location.
SpectraDataset load_spectra(const std::string& path, const LoadOptions& opts = {});

/// Inverse of load_spectra; floats serialized with 17 significant digits.
void save_spectra(const std::string& path, const SpectraDataset& data);

/// Rescale every curve so its trapezoidal area over the grid equals 1.
void normalize_area(SpectraDataset& data);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

void write_vector_csv(const std::string& path, const Eigen::VectorXd& v);

/// Chain trace persistence: one directory per chain holding chain.json,
/// tau2.csv, edges.csv (iteration, weight, hash plus a one-edge event log),
/// graph0.edgelist, omega.bin, beta_mean.csv, mu_mean.csv.
void write_chain_dir(const std::string& dir, const WeightedChain& chain);
WeightedChain read_chain_dir(const std::string& dir);

/// Run configuration shared by the CLI commands. Fields not meaningful for
/// a given command are ignored by it; validation happens before compute.
struct RunConfig {
    // output and reproducibility
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    // sampler controls
    long iters = 60000;
    long burnin = 10000;
    int thin = 10;
    double max_rate = 1e10;
    bool exact_prior_ratio = false;
    int chains = 1;
    int jobs = 1;

    // model hyperparameters
    int p_basis = 40;
    double gw_d = 3.0;
    double gw_d_scale = 1.0;       // D = scale * I
    std::string graph_prior = "uniform";  // "uniform" or "bernoulli=theta"
    double sigma_mu2 = 100.0;
    double a = 10.0;
    double b = 0.001;

    // selection
    std::string select = "bfdr=0.05";     // "median" or "bfdr=alpha"

    // fit inputs
    std::string data_path;
    bool normalize = false;
    std::string label_filter;

    // simulate inputs
    std::string experiment;               // "1", "2" or "gp"
    int sim_n = 200;
    int sim_r = 200;
    double sim_sparsity = 0.3;
    double sim_tau2 = 0.01;
    int sim_blocks = 4;
    int replicates = 5;
    bool freeze_truth = false;
    double gp_var = 5.0;
    double gp_rho = 0.5;
    double gp_nu = 0.5;
    double gp_mean_amp = 3.0;
    double gp_mean_freq = 4.0;
    // NaN means "pick the experiment default"
    double domain_lo = std::numeric_limits<double>::quiet_NaN();
    double domain_hi = std::numeric_limits<double>::quiet_NaN();
};

/// key = value lines, '#' comments. Unknown keys are an error.
void load_config_file(RunConfig& cfg, const std::string& path);

/// Apply one key/value pair; returns false for unknown keys.
bool set_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// BANDGRAPH_SEED overrides the configured seed when set.
void apply_env_overrides(RunConfig& cfg);

GraphPrior parse_graph_prior(const std::string& text);

struct SelectRule {
    bool median = false;
    double alpha = 0.05;
};
SelectRule parse_select_rule(const std::string& text);

}  // namespace bandgraph
