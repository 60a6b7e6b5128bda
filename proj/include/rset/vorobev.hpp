#pragma once

// Volume-matched thresholding of coverage functions.
//
// Given a survival curve F and a target volume t, alpha_star is the
// smallest threshold whose strict upper level set fits inside the budget
// (inf{a : F(a) <= t}) and beta_star the largest threshold whose level
// set still exhausts it (sup{a : F(a) >= t}).  The mean-shape estimators
// put weight 1 on the strict set {p > alpha_star} and distribute the
// remaining volume over the tie class {p == alpha_star} by ascending cell
// index, with at most one fractional cell, so their volume matches the
// target exactly.

#include <cstdint>

#include "rset/coverage.hpp"
#include "rset/grid.hpp"
#include "rset/rational.hpp"
#include "rset/weighted.hpp"

namespace rset {

struct ThresholdReport {
    Rational alpha_star;
    Rational beta_star;
    Rational target_volume;
    // F jumps across the target at alpha_star (lambda{p == alpha_star} > 0):
    // the volume-matched set is not unique and downstream consistency
    // guarantees degrade.
    bool plateau_flag = false;
    // {a : F(a) >= target} was empty (target above F(0)); beta_star is
    // reported as 0 by convention.
    bool empty_flag = false;
};

// inf{a in [0,1] : F(a) <= target}; a breakpoint of the curve or 0.
Rational alpha_star(const SurvivalCurve& curve, const Rational& target);

// sup{a in [0,1] : F(a) >= target}; 0 with *empty set to true when no
// threshold qualifies.
Rational beta_star(const SurvivalCurve& curve, const Rational& target,
                   bool* empty = nullptr);

ThresholdReport thresholds(const SurvivalCurve& curve, const Rational& target);

// inf{a : lambda(({p_n > a})^r) <= target} with r = 2^-k: alpha_star of
// the anchor-coarsened field's curve, computed symbolically.
Rational alpha_star_nr(const CoverageField& field, int k, const Rational& target);

// volume-matched mean at the field's own level
WeightedMask kovyazin_mean(const CoverageField& field, const Rational& target);

// volume-matched mean on the level-k grid: rank-and-fill applied to the
// anchor-coarsened field, so the weight-1 region is the grid approximation
// of the strict level set at alpha_star_nr.
WeightedMask k_nr(const CoverageField& field, int k, const Rational& target);

struct OracleExpectation {
    WeightedMask shape;
    ThresholdReport report;
};

// reference mean shape from an analytic coverage function sampled on a
// grid, by the same rank-and-fill rule; mean_volume is the target
// E lambda(X) (from the coverage integral)
OracleExpectation vorobev_from_oracle(const QuantizedField& field,
                                      const Rational& mean_volume);

} // namespace rset
