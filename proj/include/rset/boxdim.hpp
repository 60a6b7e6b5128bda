#pragma once

// Box-counting along the dyadic scale ladder.
//
// N_r(S) counts level-k cells meeting a set given as a finer mask; the
// slope of log N_r against -log r over a window of scales estimates the
// upper box-counting dimension.  check_prop1 compares coarsening error
// against the r^(d - dim - eps) envelope that a sub-dimensional boundary
// implies.

#include <cstdint>
#include <vector>

#include "rset/grid.hpp"
#include "rset/rational.hpp"

namespace rset {

struct BoxCountRow {
    int k = 0;        // coarse level
    double r = 0;     // 2^-k
    uint64_t n_r = 0; // occupied level-k cells
};

struct BoxCountReport {
    std::vector<BoxCountRow> rows;
    double slope = 0; // clamped into [0, d]
    double rss = 0;   // residual sum of squares of the log-log fit
    int fit_lo = 0;   // inclusive level range used for the fit
    int fit_hi = 0;
};

// Number of level-k cells containing at least one set cell of `set`, for
// each requested level; levels must not exceed the mask's own level.
// An empty mask yields all-zero counts.
std::vector<BoxCountRow> box_counts(const Mask& set, const std::vector<int>& levels);

// least-squares slope of log N_r vs -log r over [fit_lo, fit_hi], clamped
// into [0, d]; rows with N_r = 0 are unusable, and fewer than 3 usable
// rows is an error
BoxCountReport fit_box_dim(const std::vector<BoxCountRow>& rows, int d,
                           int fit_lo, int fit_hi);

// default fit window: drop the two coarsest and the single finest usable
// row (plateau guards at both ends of the ladder)
BoxCountReport estimate_box_dim(const std::vector<BoxCountRow>& rows, int d);

struct Prop1Row {
    int k = 0;
    double r = 0;
    double delta = 0; // lambda(B^r xor B), at the base grid
    double bound = 0; // r^(d - dim_hat - eps)
    bool ok = true;
};

struct Prop1Report {
    double dim_hat = 0;
    double eps = 0;
    std::vector<Prop1Row> rows;
    bool all_ok = true;
};

// Coarsening error of B against the envelope implied by the estimated
// boundary dimension.  dim_hat comes from the boundary's box counts over
// `levels` with the default fit window; requires d - dim_hat - eps > 0.
// A mask with an empty discrete boundary (empty or full) reports dim_hat
// 0 and zero error rows.
Prop1Report check_prop1(const Mask& set, const std::vector<int>& levels,
                        double eps);

} // namespace rset
