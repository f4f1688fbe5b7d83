#include "bandgraph/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bandgraph/bspline.hpp"
#include "bandgraph/errors.hpp"
#include "bandgraph/posterior.hpp"
#include "bandgraph/simulation.hpp"
#include "bandgraph/svg.hpp"
#include "bandgraph/version.hpp"

namespace fs = std::filesystem;

namespace bandgraph {

namespace {

SamplerControls sampler_controls_from(const RunConfig& cfg) {
    SamplerControls ctrl;
    ctrl.n_iter = cfg.iters;
    ctrl.burn_in = cfg.burnin;
    ctrl.thin_omega = cfg.thin;
    ctrl.max_rate = cfg.max_rate;
    ctrl.exact_prior_ratio = cfg.exact_prior_ratio;
    ctrl.validate();
    return ctrl;
}

Hyperparameters hyperparams_from(const RunConfig& cfg, double lo, double hi) {
    Hyperparameters hp;
    hp.basis = BasisSpec{lo, hi, cfg.p_basis, 3};
    hp.gw_prior.shape = cfg.gw_d;
    hp.gw_prior.inv_scale =
        cfg.gw_d_scale * Eigen::MatrixXd::Identity(cfg.p_basis, cfg.p_basis);
    hp.graph_prior = parse_graph_prior(cfg.graph_prior);
    hp.sigma_mu2 = cfg.sigma_mu2;
    hp.a = cfg.a;
    hp.b = cfg.b;
    hp.validate();
    return hp;
}

nlohmann::json config_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["iters"] = cfg.iters;
    j["burnin"] = cfg.burnin;
    j["thin"] = cfg.thin;
    j["max_rate"] = cfg.max_rate;
    j["exact_prior_ratio"] = cfg.exact_prior_ratio;
    j["chains"] = cfg.chains;
    j["jobs"] = cfg.jobs;
    j["p_basis"] = cfg.p_basis;
    j["gw_d"] = cfg.gw_d;
    j["gw_D_scale"] = cfg.gw_d_scale;
    j["graph_prior"] = cfg.graph_prior;
    j["sigma_mu2"] = cfg.sigma_mu2;
    j["a"] = cfg.a;
    j["b"] = cfg.b;
    j["select"] = cfg.select;
    return j;
}

void write_manifest(const std::string& dir, const std::string& command,
                    const RunConfig& cfg, double wall_time_s,
                    const nlohmann::json& extra) {
    nlohmann::json j;
    j["tool"] = "bandgraph";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = cfg.seed;
    j["wall_time_s"] = wall_time_s;
    j["config"] = config_json(cfg);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = *it;
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw IoError("manifest: cannot write to '" + dir + "'");
    out << j.dump(2) << "\n";
}

void write_graph_artifact(const std::string& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_edge_list(out, g);
}

void write_summary_artifacts(const std::string& dir, const PosteriorSummary& s,
                             const Hyperparameters& hp,
                             const SpectraDataset& data, double alpha) {
    write_matrix_csv((fs::path(dir) / "edge_probs.csv").string(),
                     s.edge_probs.values);
    write_matrix_csv((fs::path(dir) / "omega_hat.csv").string(), s.omega_hat);
    write_graph_artifact((fs::path(dir) / "graph_median.edgelist").string(),
                         s.median_graph);
    write_graph_artifact((fs::path(dir) / "graph_bfdr.edgelist").string(),
                         s.bfdr.graph);
    {
        nlohmann::json j;
        j["alpha"] = alpha;
        j["threshold"] = s.bfdr.threshold;
        j["n_edges"] = s.bfdr.graph.n_edges();
        std::ofstream out(fs::path(dir) / "graph_bfdr.json");
        out << j.dump(2) << "\n";
    }
    {
        SpectraDataset fitted;
        fitted.grid = data.grid;
        fitted.curves = s.fitted;
        save_spectra((fs::path(dir) / "fitted_curves.csv").string(), fitted);
    }
    {
        std::ofstream out(fs::path(dir) / "node_bands.csv");
        out << "node,band_lo,band_hi\n";
        char buf[64];
        for (int j = 0; j < hp.basis.n_basis; ++j) {
            const auto [lo, hi] = band_of_node(hp.basis, j);
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", j + 1, lo, hi);
            out << buf;
        }
    }
    write_heatmap_svg((fs::path(dir) / "edge_probs.svg").string(),
                      s.edge_probs.values, "posterior edge inclusion", false,
                      true);
    write_heatmap_svg((fs::path(dir) / "omega_hat.svg").string(), s.omega_hat,
                      "posterior precision (holding-time weighted)", true, true);
}

}  // namespace

void cmd_fit(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();

    // Full config validation happens before any compute or output.
    if (cfg.data_path.empty()) throw InputError("fit: --data is required");
    if (cfg.chains < 1) throw InputError("fit: chains must be >= 1");
    const SamplerControls ctrl = sampler_controls_from(cfg);
    const SelectRule rule = parse_select_rule(cfg.select);
    parse_graph_prior(cfg.graph_prior);
    if (cfg.p_basis < 4) throw InputError("fit: p-basis must be >= 4");

    LoadOptions load_opts;
    load_opts.normalize_area = cfg.normalize;
    load_opts.label_filter = cfg.label_filter;
    const SpectraDataset data = load_spectra(cfg.data_path, load_opts);

    const Hyperparameters hp =
        hyperparams_from(cfg, data.grid.front(), data.grid.back());

    std::vector<WeightedChain> chains(cfg.chains);
    {
        std::vector<std::thread> pool;
        pool.reserve(cfg.chains);
        for (int c = 0; c < cfg.chains; ++c)
            pool.emplace_back([&, c]() {
                Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(c));
                chains[c] = run_chain(data, hp, ctrl, rng);
            });
        for (auto& th : pool) th.join();
    }

    fs::create_directories(cfg.out_dir);
    for (int c = 0; c < cfg.chains; ++c)
        write_chain_dir((fs::path(cfg.out_dir) / ("chain_" + std::to_string(c)))
                            .string(),
                        chains[c]);

    const WeightedChain pooled = pool_chains(chains);
    const DesignMatrix design = build_design(hp.basis, data.grid);
    const PosteriorSummary summary = summarize(pooled, design, rule.alpha);
    write_summary_artifacts(cfg.out_dir, summary, hp, data, rule.alpha);

    nlohmann::json extra;
    extra["data"] = {{"path", cfg.data_path},
                     {"n", data.n_curves()},
                     {"r", data.n_points()},
                     {"normalized", cfg.normalize}};
    extra["tau2_hat"] = summary.tau2_hat;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(cfg.out_dir, "fit", cfg, wall, extra);
}

void cmd_simulate(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();

    if (cfg.experiment != "1" && cfg.experiment != "2" && cfg.experiment != "gp")
        throw InputError("simulate: experiment must be '1', '2' or 'gp'");
    const SamplerControls ctrl = sampler_controls_from(cfg);
    const SelectRule rule = parse_select_rule(cfg.select);
    if (cfg.jobs < 1) throw InputError("simulate: jobs must be >= 1");

    ExperimentSpec spec;
    spec.kind = cfg.experiment == "1"   ? ExperimentKind::Nonstructured
                : cfg.experiment == "2" ? ExperimentKind::Clustered
                                        : ExperimentKind::GpMatern;
    spec.p = cfg.p_basis;
    spec.n = cfg.sim_n;
    spec.r = cfg.sim_r;
    spec.sparsity = cfg.sim_sparsity;
    spec.tau2_true = cfg.sim_tau2;
    spec.gw_d = cfg.gw_d;
    spec.gw_d_scale = cfg.gw_d_scale;
    spec.n_blocks = cfg.sim_blocks;
    spec.gp_var = cfg.gp_var;
    spec.gp_rho = cfg.gp_rho;
    spec.gp_nu = cfg.gp_nu;
    spec.gp_mean_amp = cfg.gp_mean_amp;
    spec.gp_mean_freq = cfg.gp_mean_freq;
    spec.n_replicates = cfg.replicates;
    spec.seed = cfg.seed;
    spec.freeze_truth = cfg.freeze_truth;
    const bool gp = spec.kind == ExperimentKind::GpMatern;
    spec.domain_lo = std::isnan(cfg.domain_lo) ? 0.0 : cfg.domain_lo;
    spec.domain_hi = std::isnan(cfg.domain_hi)
                         ? (gp ? std::numbers::pi / 2.0 : 1.0)
                         : cfg.domain_hi;
    spec.validate();

    const Hyperparameters hp = hyperparams_from(cfg, spec.domain_lo, spec.domain_hi);

    SimControls controls;
    controls.sampler = ctrl;
    controls.select_alpha = rule.alpha;
    controls.jobs = cfg.jobs;

    fs::create_directories(cfg.out_dir);
    {
        nlohmann::json j = config_json(cfg);
        j["experiment"] = cfg.experiment;
        j["n"] = spec.n;
        j["r"] = spec.r;
        j["p"] = spec.p;
        j["sparsity"] = spec.sparsity;
        j["tau2_true"] = spec.tau2_true;
        j["n_blocks"] = spec.n_blocks;
        j["replicates"] = spec.n_replicates;
        j["freeze_truth"] = spec.freeze_truth;
        j["domain"] = {spec.domain_lo, spec.domain_hi};
        if (gp) {
            j["gp"] = {{"var", spec.gp_var},     {"rho", spec.gp_rho},
                       {"nu", spec.gp_nu},       {"mean_amp", spec.gp_mean_amp},
                       {"mean_freq", spec.gp_mean_freq}};
        }
        std::ofstream out(fs::path(cfg.out_dir) / "spec.json");
        out << j.dump(2) << "\n";
    }

    run_replicates(spec, hp, controls, cfg.out_dir);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(cfg.out_dir, "simulate", cfg, wall, {});
}

void cmd_select(const std::string& chain_path, const SelectRule& rule,
                const std::string& out_dir) {
    std::vector<WeightedChain> chains;
    if (fs::exists(fs::path(chain_path) / "chain.json")) {
        chains.push_back(read_chain_dir(chain_path));
    } else {
        for (int c = 0;; ++c) {
            const fs::path sub = fs::path(chain_path) / ("chain_" + std::to_string(c));
            if (!fs::exists(sub / "chain.json")) break;
            chains.push_back(read_chain_dir(sub.string()));
        }
        if (chains.empty())
            throw IoError("select: no chain traces found under '" + chain_path +
                          "'");
    }
    const WeightedChain pooled = pool_chains(chains);
    const EdgeProbMatrix probs = edge_probs(pooled);

    fs::create_directories(out_dir);
    write_matrix_csv((fs::path(out_dir) / "edge_probs.csv").string(), probs.values);
    if (rule.median) {
        write_graph_artifact((fs::path(out_dir) / "graph_median.edgelist").string(),
                             select_median_graph(probs));
    } else {
        const BfdrSelection sel = select_bfdr_graph(probs, rule.alpha);
        write_graph_artifact((fs::path(out_dir) / "graph_bfdr.edgelist").string(),
                             sel.graph);
        nlohmann::json j;
        j["alpha"] = rule.alpha;
        j["threshold"] = sel.threshold;
        j["n_edges"] = sel.graph.n_edges();
        std::ofstream out(fs::path(out_dir) / "graph_bfdr.json");
        out << j.dump(2) << "\n";
    }
}

}  // namespace bandgraph
