#pragma once

// Weighted cell masks: per-cell weights in [0,1] with exact volume.
//
// Estimator outputs are binary except for at most one cell carrying a
// fractional weight that tops the volume up to an exact target, so the
// representation keeps a bit mask for the weight-1 cells plus a short
// sorted list of fractional cells.  Arbitrary weight fields (e.g. loaded
// from disk) are still representable; the list just grows.

#include <cstdint>
#include <utility>
#include <vector>

#include "rset/grid.hpp"
#include "rset/rational.hpp"

namespace rset {

class WeightedMask {
public:
    WeightedMask() = default;
    explicit WeightedMask(const GridSpec& g) : ones_(g) {}
    static WeightedMask from_mask(const Mask& m) {
        WeightedMask w;
        w.ones_ = m;
        return w;
    }

    const GridSpec& grid() const { return ones_.grid(); }
    const Mask& ones() const { return ones_; }
    const std::vector<std::pair<uint64_t, Rational>>& fractional() const {
        return frac_;
    }

    // weight of one cell, exact
    Rational weight(uint64_t cell) const;

    void set_one(uint64_t cell) { ones_.set(cell); }
    // w in [0,1]; 0 and 1 collapse into the bit mask.  Cells must be
    // touched at most once between clears (estimators fill monotonically).
    void set_weight(uint64_t cell, const Rational& w);

    // sum of weights * r^d, exact
    Rational volume() const;

    friend bool operator==(const WeightedMask& a, const WeightedMask& b) {
        return a.ones_ == b.ones_ && a.frac_ == b.frac_;
    }
    friend bool operator!=(const WeightedMask& a, const WeightedMask& b) {
        return !(a == b);
    }

    // called by readers that fill frac_ out of order
    void normalize_fractional();

private:
    Mask ones_;
    // sorted by cell index; weights strictly inside (0,1); cells absent
    // from ones_
    std::vector<std::pair<uint64_t, Rational>> frac_;
};

// sum over cells of |w_A - w_B| * r^d, exact; grids must match.
Rational symm_diff_volume(const WeightedMask& a, const WeightedMask& b);
Rational symm_diff_volume(const WeightedMask& a, const Mask& b);
Rational symm_diff_volume(const Mask& a, const WeightedMask& b);

// block refinement, mirroring refine() for plain masks: weights are
// inherited by all sub-cells, so the represented density is unchanged.
WeightedMask refine(const WeightedMask& coarse, int K);

} // namespace rset
