#include "rset/vorobev.hpp"

#include <stdexcept>
#include <vector>

namespace rset {

Rational alpha_star(const SurvivalCurve& curve, const Rational& target) {
    if (target.sign() < 0)
        throw std::invalid_argument("alpha_star: negative target volume");
    if (curve.eval(Rational(0)) <= target) return Rational(0);
    // first breakpoint whose F value fits the budget; F is non-increasing
    const auto& steps = curve.steps();
    size_t lo = 0, hi = steps.size();
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (steps[mid].f <= target) hi = mid;
        else lo = mid + 1;
    }
    if (lo == steps.size()) return Rational(1); // F never fits inside [0,1]
    return steps[lo].value;
}

Rational beta_star(const SurvivalCurve& curve, const Rational& target,
                   bool* empty) {
    if (empty) *empty = false;
    if (target.sign() < 0)
        throw std::invalid_argument("beta_star: negative target volume");
    const auto& steps = curve.steps();
    // F is constant on [v_j, v_{j+1}) with value steps[j].f, on [v_m, 1]
    // with value steps[m].f, and on [0, v_0) with value total.
    if (!steps.empty() && steps.back().f >= target) return Rational(1);
    for (size_t j = steps.size(); j-- > 0;) {
        if (steps[j].f >= target)
            return steps[j + 1].value; // right end of the qualifying interval
    }
    if (curve.total() >= target) {
        if (steps.empty()) return Rational(1); // F == total everywhere
        // the qualifying interval [0, v_0) is empty when v_0 == 0
        if (steps.front().value.sign() > 0) return steps.front().value;
    }
    if (empty) *empty = true;
    return Rational(0);
}

ThresholdReport thresholds(const SurvivalCurve& curve, const Rational& target) {
    ThresholdReport rep;
    rep.target_volume = target;
    rep.alpha_star = alpha_star(curve, target);
    rep.beta_star = beta_star(curve, target, &rep.empty_flag);
    rep.plateau_flag = curve.mass_at(rep.alpha_star).sign() > 0;
    return rep;
}

Rational alpha_star_nr(const CoverageField& field, int k, const Rational& target) {
    return alpha_star(survival_curve(coarsen_field(field, k)), target);
}

namespace {

// Rank-and-fill over integer cell values: weight 1 where value/denom >
// alpha_star, then walk the tie class {value == alpha_star * denom} in
// ascending cell index until the target volume is hit exactly; at most
// one cell gets a fractional weight.
WeightedMask rank_and_fill(const GridSpec& g, const std::vector<uint32_t>& vals,
                           uint64_t denom, const SurvivalCurve& curve,
                           const Rational& target) {
    if (target.sign() < 0 || target > Rational(1))
        throw std::invalid_argument("rank_and_fill: target volume outside [0,1]");
    Rational astar = alpha_star(curve, target);

    WeightedMask out{g};
    // strict cells: value > astar * denom
    int128 cut_num = detail::checked_mul(astar.num(), int128(denom));
    int128 cut_den = astar.den();
    // integer tie value if astar*denom is integral, else no tie class
    bool tie_exists = cut_num % cut_den == 0;
    int128 tie_val = tie_exists ? cut_num / cut_den : -1;

    uint64_t strict_count = 0;
    for (uint64_t c = 0; c < vals.size(); ++c) {
        if (int128(vals[c]) * cut_den > cut_num) {
            out.set_one(c);
            ++strict_count;
        }
    }
    Rational cell_vol = g.cell_volume();
    Rational remainder = target - Rational(int128(strict_count), 1) * cell_vol;
    if (remainder.sign() < 0)
        throw std::logic_error("rank_and_fill: strict set exceeds target");
    if (remainder.is_zero()) return out;

    // whole tie cells first, then the single fractional one
    Rational acc(0);
    for (uint64_t c = 0; c < vals.size() && acc < remainder; ++c) {
        if (!tie_exists || int128(vals[c]) != tie_val) continue;
        Rational next = acc + cell_vol;
        if (next <= remainder) {
            out.set_one(c);
            acc = next;
        } else {
            out.set_weight(c, (remainder - acc) / cell_vol);
            acc = remainder;
        }
    }
    if (acc != remainder)
        throw std::logic_error("rank_and_fill: tie class too small for target");
    return out;
}

} // namespace

WeightedMask kovyazin_mean(const CoverageField& field, const Rational& target) {
    return rank_and_fill(field.grid, field.counts, field.n,
                         survival_curve(field), target);
}

WeightedMask k_nr(const CoverageField& field, int k, const Rational& target) {
    CoverageField coarse = coarsen_field(field, k);
    return rank_and_fill(coarse.grid, coarse.counts, coarse.n,
                         survival_curve(coarse), target);
}

OracleExpectation vorobev_from_oracle(const QuantizedField& field,
                                      const Rational& mean_volume) {
    SurvivalCurve curve = survival_curve(field);
    OracleExpectation out;
    out.report = thresholds(curve, mean_volume);
    out.shape = rank_and_fill(field.grid, field.values,
                              uint64_t(1) << field.value_bits, curve, mean_volume);
    return out;
}

} // namespace rset
