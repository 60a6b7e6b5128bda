#pragma once

// Empirical coverage fields and their survival curves.
//
// A coverage field holds, per cell, the integer number of replicates that
// contained the cell; dividing by n is deferred so every derived quantity
// (mean volume, curve breakpoints, level sets) stays exact.  The survival
// curve F(alpha) = lambda{p > alpha} is materialized as a right-continuous
// non-increasing step function whose breakpoints are the attained values.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rset/grid.hpp"
#include "rset/rational.hpp"

namespace rset {

struct CoverageField {
    GridSpec grid;
    uint32_t n = 0;                // replicates accumulated so far
    std::vector<uint32_t> counts;  // per cell, in [0, n]

    CoverageField() = default;
    explicit CoverageField(const GridSpec& g)
        : grid(g), counts(g.cell_count(), 0) {}

    uint64_t total_count() const; // sum over cells
};

// add one replicate; the mask's grid must match
void accumulate(CoverageField& field, const Mask& replicate);

// build from a batch; throws on an empty batch or mixed grids
CoverageField accumulate(const std::vector<Mask>& replicates);

// pooled mean volume (1/n) * sum lambda(X_i), exact
Rational empirical_mean_volume(const CoverageField& field);

// anchor-sampled coarsening of the counts to level k <= base level; the
// level set of the result at any threshold equals the grid approximation
// of the base-level level set.
CoverageField coarsen_field(const CoverageField& field, int k);

// An analytic coverage function p(x) with a note on where its formula
// comes from; evaluated pointwise.
struct CoverageOracle {
    std::function<double(const std::array<double, 3>&)> p;
    std::string source;
};

// Oracle values sampled on a grid and rounded to multiples of 2^-value_bits
// so thresholding is exact.  values[] holds q with p ~ q / 2^value_bits.
struct QuantizedField {
    GridSpec grid;
    int value_bits = 20;
    std::vector<uint32_t> values;

    Rational value(uint64_t cell) const {
        return Rational(int128(values[cell]), int128(1) << value_bits);
    }
};

// sample at cell centers (the analytic law of a center-rasterized
// replicate is then exactly the binomial with success p(center))
QuantizedField sample_oracle(const CoverageOracle& oracle, const GridSpec& g,
                             int value_bits = 20);

class SurvivalCurve {
public:
    struct Step {
        Rational value; // attained coverage value
        Rational f;     // F(value) = lambda{p > value}
    };

    // steps ascending in value, f strictly decreasing downward; `total`
    // is F just left of the smallest value (the field's support measure).
    static SurvivalCurve from_steps(std::vector<Step> steps, Rational total);

    const std::vector<Step>& steps() const { return steps_; }
    const Rational& total() const { return total_; }

    // F(alpha), right-continuous
    Rational eval(const Rational& alpha) const;
    // F(alpha-) = lambda{p >= alpha}
    Rational eval_left(const Rational& alpha) const;
    // lambda{p == alpha}; zero when alpha is not attained
    Rational mass_at(const Rational& alpha) const;

private:
    std::vector<Step> steps_;
    Rational total_;
};

SurvivalCurve survival_curve(const CoverageField& field);
SurvivalCurve survival_curve(const QuantizedField& field);

// {p > alpha} (strict) or {p >= alpha}; exact by integer thresholding.
// lambda(strict level set) equals the curve's F(alpha) identically.
Mask level_set(const CoverageField& field, const Rational& alpha, bool strict);
Mask level_set(const QuantizedField& field, const Rational& alpha, bool strict);

// grid approximation of the level set at level k
Mask level_set_grid(const CoverageField& field, const Rational& alpha, int k,
                    bool strict);
Mask level_set_grid(const QuantizedField& field, const Rational& alpha, int k,
                    bool strict);

} // namespace rset
