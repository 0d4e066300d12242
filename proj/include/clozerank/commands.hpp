#pragma once

#include <iosfwd>
#include <string>

#include "clozerank/run_config.hpp"

namespace clozerank {

// Subcommand bodies. Each writes its primary outputs to the configured
// paths and human-readable progress to `out`. They throw Error on failure;
// the CLI maps validation errors to exit 1 and runtime errors to exit 2.
void cmd_featurize(const RunConfig& cfg, std::ostream& out);
void cmd_train(const RunConfig& cfg, std::ostream& out);
void cmd_predict(const RunConfig& cfg, std::ostream& out);
void cmd_evaluate(const RunConfig& cfg, std::ostream& out);
void cmd_compare(const RunConfig& cfg, std::ostream& out);
void cmd_curve(const RunConfig& cfg, std::ostream& out);
void cmd_ablate(const RunConfig& cfg, std::ostream& out);
void cmd_single_feature(const RunConfig& cfg, std::ostream& out);
void cmd_synth(const RunConfig& cfg, std::ostream& out);
void cmd_stats(const RunConfig& cfg, std::ostream& out);

}  // namespace clozerank
