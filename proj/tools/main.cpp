#include <cstdio>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bandgraph/commands.hpp"
#include "bandgraph/errors.hpp"
#include "bandgraph/version.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Every option funnels through set_config_key so the config file and the
// command line share one parser and one set of checks.
void add_key_option(CLI::App* app, Overrides* overrides, const std::string& flag,
                    const std::string& key, const std::string& desc) {
    app->add_option_function<std::string>(
        flag, [overrides, key](const std::string& v) {
            overrides->emplace_back(key, v);
        },
        desc);
}

void add_key_flag(CLI::App* app, Overrides* overrides, const std::string& flag,
                  const std::string& key, const std::string& desc) {
    app->add_flag_callback(
        flag, [overrides, key]() { overrides->emplace_back(key, "true"); }, desc);
}

void add_common_options(CLI::App* app, Overrides* overrides) {
    add_key_option(app, overrides, "--out", "out", "output directory");
    add_key_option(app, overrides, "--seed", "seed", "RNG seed");
    add_key_option(app, overrides, "--iters", "iters", "total MCMC sweeps");
    add_key_option(app, overrides, "--burnin", "burnin", "burn-in sweeps");
    add_key_option(app, overrides, "--thin", "thin",
                   "store every k-th precision sample");
    add_key_option(app, overrides, "--p-basis", "p-basis",
                   "number of cubic B-spline basis functions");
    add_key_option(app, overrides, "--gw-d", "gw-d", "G-Wishart shape d (> 2)");
    add_key_option(app, overrides, "--gw-D-scale", "gw-D-scale",
                   "G-Wishart inverse scale D = c*I");
    add_key_option(app, overrides, "--graph-prior", "graph-prior",
                   "'uniform' or 'bernoulli=theta'");
    add_key_option(app, overrides, "--sigma-mu2", "sigma-mu2",
                   "prior variance of the shared mean");
    add_key_option(app, overrides, "--a", "a", "error-variance prior parameter a");
    add_key_option(app, overrides, "--b", "b", "error-variance prior parameter b");
    add_key_option(app, overrides, "--select", "select",
                   "'median' or 'bfdr=alpha'");
    add_key_option(app, overrides, "--max-rate", "max-rate",
                   "cap on individual birth/death rates");
    add_key_flag(app, overrides, "--exact-prior-ratio", "exact-prior-ratio",
                 "include Monte Carlo prior normalizing-constant ratios in the "
                 "rates (small p only)");
}

int run(int argc, char** argv) {
    CLI::App app{"Joint B-spline smoothing and conditional-independence graph "
                 "learning for spectral curves"};
    app.set_version_flag("--version", bandgraph::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;

    CLI::App* fit = app.add_subcommand("fit", "fit the model to a spectra CSV");
    fit->add_option("--config", config_path, "key = value config file");
    add_common_options(fit, &overrides);
    add_key_option(fit, &overrides, "--data", "data", "input spectra CSV");
    add_key_flag(fit, &overrides, "--normalize", "normalize",
                 "normalize curves to unit area under the curve");
    add_key_option(fit, &overrides, "--label-filter", "label-filter",
                   "treat the first column as a label and keep matching rows");
    add_key_option(fit, &overrides, "--chains", "chains",
                   "number of independent chains");

    CLI::App* sim = app.add_subcommand("simulate", "run a simulation experiment");
    sim->add_option("--config", config_path, "key = value config file");
    add_common_options(sim, &overrides);
    add_key_option(sim, &overrides, "--experiment", "experiment",
                   "'1' (random graph), '2' (block graph) or 'gp'");
    add_key_option(sim, &overrides, "--n", "sim-n", "curves per dataset");
    add_key_option(sim, &overrides, "--r", "sim-r", "grid points per curve");
    add_key_option(sim, &overrides, "--sparsity", "sparsity",
                   "edge probability of the generating graph");
    add_key_option(sim, &overrides, "--tau2", "sim-tau2",
                   "observation noise variance");
    add_key_option(sim, &overrides, "--blocks", "blocks",
                   "number of blocks (experiment 2)");
    add_key_option(sim, &overrides, "--replicates", "replicates",
                   "number of replicates");
    add_key_flag(sim, &overrides, "--freeze-truth", "freeze-truth",
                 "keep one generating (graph, Omega, beta) across replicates");
    add_key_option(sim, &overrides, "--jobs", "jobs", "parallel replicates");
    add_key_option(sim, &overrides, "--gp-var", "gp-var", "GP marginal variance");
    add_key_option(sim, &overrides, "--gp-rho", "gp-rho", "Matern range");
    add_key_option(sim, &overrides, "--gp-nu", "gp-nu", "Matern smoothness");
    add_key_option(sim, &overrides, "--gp-mean-amp", "gp-mean-amp",
                   "GP mean amplitude");
    add_key_option(sim, &overrides, "--gp-mean-freq", "gp-mean-freq",
                   "GP mean frequency");
    add_key_option(sim, &overrides, "--domain-lo", "domain-lo", "domain start");
    add_key_option(sim, &overrides, "--domain-hi", "domain-hi", "domain end");

    CLI::App* select =
        app.add_subcommand("select", "re-run graph selection on stored traces");
    std::string chain_path;
    std::string select_rule = "bfdr=0.05";
    std::string select_out;
    select->add_option("chain-dir", chain_path,
                       "chain directory or fit output directory")
        ->required();
    select->add_option("--select", select_rule, "'median' or 'bfdr=alpha'");
    select->add_option("--out", select_out,
                       "output directory (default: chain-dir)");

    CLI11_PARSE(app, argc, argv);

    bandgraph::RunConfig cfg;
    if (!config_path.empty()) bandgraph::load_config_file(cfg, config_path);
    for (const auto& [key, value] : overrides)
        if (!bandgraph::set_config_key(cfg, key, value))
            throw bandgraph::InputError("unknown option key '" + key + "'");
    bandgraph::apply_env_overrides(cfg);

    if (fit->parsed()) {
        bandgraph::cmd_fit(cfg);
    } else if (sim->parsed()) {
        bandgraph::cmd_simulate(cfg);
    } else if (select->parsed()) {
        const bandgraph::SelectRule rule = bandgraph::parse_select_rule(select_rule);
        bandgraph::cmd_select(chain_path, rule,
                              select_out.empty() ? chain_path : select_out);
    }
    return 0;
}

void print_error(const char* kind, const std::exception& e, int code) {
    nlohmann::json j;
    j["error"] = {{"kind", kind}, {"message", e.what()}, {"exit_code", code}};
    std::fprintf(stderr, "%s\n", j.dump().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const bandgraph::IoError& e) {
        print_error("data", e, 3);
        return 3;
    } catch (const bandgraph::NumericError& e) {
        print_error("numeric", e, 4);
        return 4;
    } catch (const bandgraph::InputError& e) {
        print_error("config", e, 2);
        return 2;
    } catch (const bandgraph::Error& e) {
        print_error("error", e, 4);
        return 4;
    } catch (const std::exception& e) {
        print_error("internal", e, 4);
        return 4;
    }
}
