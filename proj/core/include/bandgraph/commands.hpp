#pragma once

#include <string>

#include "bandgraph/io.hpp"

namespace bandgraph {

/// Fit the model to a spectra CSV and write the posterior artifacts plus
/// per-chain traces and a run manifest under cfg.out_dir.
void cmd_fit(const RunConfig& cfg);

/// Run a simulation experiment: generate, fit, and score replicates; writes
/// spec.json, metrics.csv, aggregate.csv and a manifest under cfg.out_dir.
void cmd_simulate(const RunConfig& cfg);

/// Recompute edge probabilities and graph selection from persisted chain
/// traces, without refitting. `chain_path` is either a single chain
/// directory or a fit output directory containing chain_0, chain_1, ...
void cmd_select(const std::string& chain_path, const SelectRule& rule,
                const std::string& out_dir);

}  // namespace bandgraph
