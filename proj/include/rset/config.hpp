#pragma once

// Plain-text run configuration.
//
// key = value lines grouped under [section] headers.  A bare key picks up
// the section prefix ([grid] d = 2 means grid.d); a key written with a dot
// is taken as-is, so intensity.m0 may sit inside [model].  # and ; start
// comments.  Unknown keys, malformed values, and missing required keys are
// reported with the offending token named; readers of the error can paste
// the name straight back into the file.

#include <cstdint>
#include <string>
#include <vector>

#include "rset/boolean_model.hpp"

namespace rset {

// configuration or data problems that should surface as exit code 2
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// knobs for the experiment runners, all optional in the file
struct ExperimentPlan {
    std::vector<uint32_t> n_schedule{25, 50, 100, 200, 400};
    std::vector<int> k_schedule{4, 5, 6};
    uint32_t trials = 20;
    double kappa = 1.0;
    double alpha = 0.3;
    std::vector<double> eps_grid{0.02, 0.05, 0.1, 0.15, 0.2, 0.3};
    double bracket_tol = 0.05;
    std::vector<int> levels; // box-count levels; empty means 0..K

    void validate(const GridSpec& grid) const; // ConfigError on violations
};

struct ParsedConfig {
    BooleanConfig model;
    ExperimentPlan plan;
};

ParsedConfig parse_config(const std::string& text, const std::string& origin);
ParsedConfig load_config(const std::string& path);

} // namespace rset
