#pragma once

// Experiment runners behind the CLI: Monte Carlo studies of the
// volume-matched mean-shape estimators against their analytic oracles,
// with CSV output.  Every run is a deterministic function of (config,
// seed): trial units draw from substreams keyed by their position in the
// run, workers write into preallocated row slots, and rows are emitted in
// (n, k, trial) order whatever the completion order.

#include <string>

#include "rset/config.hpp"

namespace rset {

struct RunOptions {
    std::string out_dir;
    int threads = 1;
    bool quiet = false;
};

// exit codes: 0 ok; ConfigError propagates (CLI maps it to 2);
// run_rate_check returns 3 when a proven bound fails beyond MC slack
int run_simulate(const ParsedConfig& cfg, const RunOptions& opt);
int run_estimate(const std::string& masks_dir, int mesh_level,
                 const RunOptions& opt);
int run_fcurve(const ParsedConfig& cfg, const RunOptions& opt);
int run_boxdim(const ParsedConfig& cfg, const RunOptions& opt);
int run_consistency(const ParsedConfig& cfg, const RunOptions& opt);
int run_rate_check(const ParsedConfig& cfg, const RunOptions& opt);
int run_bracket(const ParsedConfig& cfg, const RunOptions& opt);

} // namespace rset
