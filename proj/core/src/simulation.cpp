#include "bandgraph/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "bandgraph/bspline.hpp"
#include "bandgraph/errors.hpp"
#include "bandgraph/posterior.hpp"

namespace bandgraph {

void ExperimentSpec::validate() const {
    if (p < 4 || n < 1 || r < 2)
        throw InputError("ExperimentSpec: need p >= 4, n >= 1, r >= 2");
    if (!(domain_lo < domain_hi))
        throw InputError("ExperimentSpec: domain_lo must be < domain_hi");
    if (sparsity < 0.0 || sparsity > 1.0)
        throw InputError("ExperimentSpec: sparsity must lie in [0,1]");
    if (tau2_true < 0.0) throw InputError("ExperimentSpec: tau2_true must be >= 0");
    if (!(gw_d > 2.0)) throw InputError("ExperimentSpec: gw_d must be > 2");
    if (!(gw_d_scale > 0.0))
        throw InputError("ExperimentSpec: gw_d_scale must be > 0");
    if (n_replicates < 1)
        throw InputError("ExperimentSpec: n_replicates must be >= 1");
    if (kind == ExperimentKind::GpMatern && (!(gp_rho > 0.0) || !(gp_nu > 0.0)))
        throw InputError("ExperimentSpec: gp_rho and gp_nu must be > 0");
}

namespace {

std::vector<double> even_grid(double lo, double hi, int r) {
    std::vector<double> grid(r);
    for (int l = 0; l < r; ++l)
        grid[l] = lo + (hi - lo) * static_cast<double>(l) / (r - 1);
    return grid;
}

// Y = beta Phi^T + noise, given truth coefficients.
Eigen::MatrixXd observe(const Eigen::MatrixXd& betas, const Eigen::MatrixXd& phi,
                        double tau2, Rng& rng) {
    Eigen::MatrixXd y = betas * phi.transpose();
    if (tau2 > 0.0) {
        const double sd = std::sqrt(tau2);
        for (int i = 0; i < y.rows(); ++i)
            for (int l = 0; l < y.cols(); ++l) y(i, l) += draw_normal(rng, 0.0, sd);
    }
    return y;
}

SyntheticDataset gen_structural(const ExperimentSpec& spec, const Graph& graph,
                                Rng& rng) {
    const BasisSpec basis{spec.domain_lo, spec.domain_hi, spec.p, 3};
    const DesignMatrix design = build_design(basis, even_grid(spec.domain_lo,
                                                              spec.domain_hi,
                                                              spec.r));
    GWishartParams gw{spec.gw_d, spec.gw_d_scale * Eigen::MatrixXd::Identity(
                                     spec.p, spec.p)};
    const PrecisionMatrix omega = sample_direct(gw, graph, rng);

    // beta_i ~ N(0, Omega^{-1}) via L^{-T} z with Omega = L L^T.
    Eigen::LLT<Eigen::MatrixXd> llt(omega.values);
    Eigen::MatrixXd betas(spec.n, spec.p);
    Eigen::VectorXd z(spec.p);
    for (int i = 0; i < spec.n; ++i) {
        for (int j = 0; j < spec.p; ++j) z[j] = draw_normal(rng);
        betas.row(i) = llt.matrixL().transpose().solve(z).transpose();
    }

    SyntheticDataset ds;
    ds.data.grid = design.grid;
    ds.data.curves = observe(betas, design.values, spec.tau2_true, rng);
    ds.true_graph = graph;
    ds.true_omega = omega.values;
    ds.true_betas = std::move(betas);
    return ds;
}

}  // namespace

SyntheticDataset gen_experiment1(const ExperimentSpec& spec, Rng& rng) {
    spec.validate();
    const Graph graph = sample_random_graph(spec.p, spec.sparsity, rng);
    return gen_structural(spec, graph, rng);
}

SyntheticDataset gen_experiment2(const ExperimentSpec& spec,
                                 const std::vector<std::vector<int>>& blocks,
                                 Rng& rng) {
    spec.validate();
    const Graph graph = sample_block_graph(spec.p, blocks, spec.sparsity, rng);
    return gen_structural(spec, graph, rng);
}

double matern(double dist, double rho, double nu) {
    if (dist < 0.0) throw InputError("matern: distance must be nonnegative");
    if (!(rho > 0.0) || !(nu > 0.0))
        throw InputError("matern: rho and nu must be positive");
    if (dist == 0.0) return 1.0;
    const double x = std::sqrt(2.0 * nu) * dist / rho;
    if (nu == 0.5) return std::exp(-x);
    return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(x, nu) *
           std::cyl_bessel_k(nu, x);
}

SyntheticDataset gen_gp_dataset(const ExperimentSpec& spec, Rng& rng) {
    spec.validate();
    const std::vector<double> grid =
        even_grid(spec.domain_lo, spec.domain_hi, spec.r);

    Eigen::MatrixXd sigma(spec.r, spec.r);
    for (int l = 0; l < spec.r; ++l)
        for (int m = 0; m <= l; ++m) {
            const double v =
                spec.gp_var * matern(std::abs(grid[l] - grid[m]), spec.gp_rho,
                                     spec.gp_nu);
            sigma(l, m) = v;
            sigma(m, l) = v;
        }

    Eigen::VectorXd mean(spec.r);
    for (int l = 0; l < spec.r; ++l)
        mean[l] = spec.gp_mean_amp * std::sin(spec.gp_mean_freq * grid[l]);

    const Eigen::MatrixXd jittered =
        sigma + 1e-10 * Eigen::MatrixXd::Identity(spec.r, spec.r);
    Eigen::LLT<Eigen::MatrixXd> llt(jittered);
    if (llt.info() != Eigen::Success)
        throw NumericError("gen_gp_dataset: covariance not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();

    Eigen::MatrixXd curves(spec.n, spec.r);
    Eigen::VectorXd z(spec.r);
    const double noise_sd = std::sqrt(spec.tau2_true);
    for (int i = 0; i < spec.n; ++i) {
        for (int l = 0; l < spec.r; ++l) z[l] = draw_normal(rng);
        curves.row(i) = (mean + L * z).transpose();
        if (spec.tau2_true > 0.0)
            for (int l = 0; l < spec.r; ++l)
                curves(i, l) += draw_normal(rng, 0.0, noise_sd);
    }

    // Least-squares projection of the grid covariance onto coefficient space.
    const BasisSpec basis{spec.domain_lo, spec.domain_hi, spec.p, 3};
    const DesignMatrix design = build_design(basis, grid);
    const Eigen::MatrixXd& phi = design.values;
    Eigen::LLT<Eigen::MatrixXd> gram((phi.transpose() * phi).eval());
    const Eigen::MatrixXd proj = gram.solve(phi.transpose());  // p x r

    SyntheticDataset ds;
    ds.data.grid = grid;
    ds.data.curves = std::move(curves);
    ds.sigma_true_grid = sigma;
    ds.sigma_true_coef = proj * sigma * proj.transpose();
    ds.sigma_true_coef =
        (0.5 * (ds.sigma_true_coef + ds.sigma_true_coef.transpose())).eval();
    return ds;
}

double kl_divergence(const Eigen::MatrixXd& sigma_true,
                     const Eigen::MatrixXd& sigma_hat) {
    const int p = static_cast<int>(sigma_true.rows());
    if (sigma_hat.rows() != p || sigma_hat.cols() != p ||
        sigma_true.cols() != p)
        throw InputError("kl_divergence: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt_true(sigma_true);
    if (llt_true.info() != Eigen::Success)
        throw NumericError("kl_divergence: sigma_true not positive definite");
    Eigen::LLT<Eigen::MatrixXd> llt_hat(sigma_hat);
    if (llt_hat.info() != Eigen::Success)
        throw NumericError("kl_divergence: sigma_hat not positive definite");

    const double trace = llt_true.solve(sigma_hat).trace();
    const double logdet_true =
        2.0 * llt_true.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double logdet_hat =
        2.0 * llt_hat.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return 0.5 * (trace - p - (logdet_hat - logdet_true));
}

double rmse_curves(const Eigen::MatrixXd& fitted, const Eigen::MatrixXd& truth) {
    if (fitted.rows() != truth.rows() || fitted.cols() != truth.cols())
        throw InputError("rmse_curves: shape mismatch");
    return std::sqrt((fitted - truth).squaredNorm() /
                     static_cast<double>(fitted.size()));
}

std::vector<double> ReplicateReport::collect(const std::string& metric) const {
    std::vector<double> out;
    for (const auto& m : replicates) {
        if (m.failed) continue;
        double v = std::numeric_limits<double>::quiet_NaN();
        if (metric == "shd_median_rule") v = m.shd_median;
        else if (metric == "shd_bfdr_rule") v = m.shd_bfdr;
        else if (metric == "kl") v = m.kl;
        else if (metric == "rmse") v = m.rmse;
        else if (metric == "runtime_s") v = m.runtime_s;
        if (!std::isnan(v)) out.push_back(v);
    }
    return out;
}

namespace {

ReplicateMetrics score_one(const ExperimentSpec& spec, const Hyperparameters& hp,
                           const SimControls& controls, int rep,
                           const SyntheticDataset* frozen) {
    ReplicateMetrics metrics;
    metrics.replicate = rep;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Rng gen_rng = make_stream(spec.seed, 0x0dd0 + rep);
        SyntheticDataset ds;
        if (frozen) {
            ds = *frozen;
            // keep the frozen coefficients, redraw only the observation noise
            const BasisSpec basis{spec.domain_lo, spec.domain_hi, spec.p, 3};
            const DesignMatrix design = build_design(basis, ds.data.grid);
            Eigen::MatrixXd y = ds.true_betas * design.values.transpose();
            const double sd = std::sqrt(spec.tau2_true);
            for (int i = 0; i < y.rows(); ++i)
                for (int l = 0; l < y.cols(); ++l)
                    y(i, l) += spec.tau2_true > 0.0 ? draw_normal(gen_rng, 0.0, sd)
                                                    : 0.0;
            ds.data.curves = std::move(y);
        } else if (spec.kind == ExperimentKind::Nonstructured) {
            ds = gen_experiment1(spec, gen_rng);
        } else if (spec.kind == ExperimentKind::Clustered) {
            ds = gen_experiment2(spec, even_blocks(spec.p, spec.n_blocks), gen_rng);
        } else {
            ds = gen_gp_dataset(spec, gen_rng);
        }

        Rng fit_rng = make_stream(spec.seed, 0xf17 + rep);
        const WeightedChain chain =
            run_chain(ds.data, hp, controls.sampler, fit_rng);
        const DesignMatrix design =
            build_design(hp.basis, ds.data.grid);
        const PosteriorSummary summary =
            summarize(chain, design, controls.select_alpha);

        if (spec.kind == ExperimentKind::GpMatern) {
            Eigen::LLT<Eigen::MatrixXd> llt(summary.omega_hat);
            if (llt.info() != Eigen::Success)
                throw NumericError("replicate: omega_hat not positive definite");
            const Eigen::MatrixXd sigma_hat = llt.solve(
                Eigen::MatrixXd::Identity(chain.p, chain.p));
            metrics.kl = kl_divergence(ds.sigma_true_coef,
                                       0.5 * (sigma_hat + sigma_hat.transpose()));
            metrics.rmse = rmse_curves(summary.fitted, ds.data.curves);
        } else {
            metrics.shd_median = shd(summary.median_graph, ds.true_graph, true);
            metrics.shd_bfdr = shd(summary.bfdr.graph, ds.true_graph, true);
        }
    } catch (const std::exception& e) {
        metrics.failed = true;
        metrics.error = e.what();
    }
    metrics.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return metrics;
}

void write_csv_value(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

std::vector<double> quantiles(std::vector<double> v) {
    // min, q25, median, q75, max by linear interpolation
    std::sort(v.begin(), v.end());
    auto q = [&v](double f) {
        if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
        const double idx = f * (v.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        const double frac = idx - lo;
        return v[lo] * (1.0 - frac) + v[hi] * frac;
    };
    return {q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)};
}

}  // namespace

ReplicateReport run_replicates(const ExperimentSpec& spec, const Hyperparameters& hp,
                               const SimControls& controls,
                               const std::string& out_dir) {
    spec.validate();
    hp.validate();
    controls.sampler.validate();
    if (controls.jobs < 1) throw InputError("run_replicates: jobs must be >= 1");

    SyntheticDataset frozen;
    const SyntheticDataset* frozen_ptr = nullptr;
    if (spec.freeze_truth) {
        if (spec.kind == ExperimentKind::GpMatern)
            throw InputError("run_replicates: freeze_truth applies to the "
                             "structural experiments only");
        Rng truth_rng = make_stream(spec.seed, 0x7207);
        frozen = spec.kind == ExperimentKind::Nonstructured
                     ? gen_experiment1(spec, truth_rng)
                     : gen_experiment2(spec, even_blocks(spec.p, spec.n_blocks),
                                       truth_rng);
        frozen_ptr = &frozen;
    }

    ReplicateReport report;
    report.replicates.resize(spec.n_replicates);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int rep = next.fetch_add(1);
            if (rep >= spec.n_replicates) return;
            report.replicates[rep] = score_one(spec, hp, controls, rep, frozen_ptr);
        }
    };
    if (controls.jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int k = std::min(controls.jobs, spec.n_replicates);
        pool.reserve(k);
        for (int t = 0; t < k; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    if (!out_dir.empty()) write_replicate_report(report, out_dir);
    return report;
}

void write_replicate_report(const ReplicateReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::ofstream metrics(fs::path(dir) / "metrics.csv");
    if (!metrics) throw IoError("write_replicate_report: cannot write metrics.csv");
    metrics << "replicate,shd_median_rule,shd_bfdr_rule,kl,rmse,runtime_s,failed\n";
    for (const auto& m : report.replicates) {
        metrics << m.replicate << ",";
        write_csv_value(metrics, m.shd_median);
        metrics << ",";
        write_csv_value(metrics, m.shd_bfdr);
        metrics << ",";
        write_csv_value(metrics, m.kl);
        metrics << ",";
        write_csv_value(metrics, m.rmse);
        metrics << ",";
        write_csv_value(metrics, m.runtime_s);
        metrics << "," << (m.failed ? 1 : 0) << "\n";
    }

    std::ofstream agg(fs::path(dir) / "aggregate.csv");
    agg << "metric,min,q25,median,q75,max,mean,sd,n\n";
    for (const std::string name :
         {"shd_median_rule", "shd_bfdr_rule", "kl", "rmse", "runtime_s"}) {
        const std::vector<double> vals = report.collect(name);
        if (vals.empty()) continue;
        const std::vector<double> qs = quantiles(vals);
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= vals.size();
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var = vals.size() > 1 ? var / (vals.size() - 1) : 0.0;
        agg << name;
        for (double q : qs) {
            agg << ",";
            write_csv_value(agg, q);
        }
        agg << ",";
        write_csv_value(agg, mean);
        agg << ",";
        write_csv_value(agg, std::sqrt(var));
        agg << "," << vals.size() << "\n";
    }
}

}  // namespace bandgraph
