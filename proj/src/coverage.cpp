#include "rset/coverage.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace rset {

uint64_t CoverageField::total_count() const {
    uint64_t t = 0;
    for (uint32_t c : counts) t += c;
    return t;
}

void accumulate(CoverageField& field, const Mask& replicate) {
    if (replicate.grid() != field.grid)
        throw std::invalid_argument("accumulate: replicate grid differs from field grid");
    const auto& words = replicate.words();
    for (size_t w = 0; w < words.size(); ++w) {
        uint64_t bits = words[w];
        while (bits) {
            int b = std::countr_zero(bits);
            bits &= bits - 1;
            ++field.counts[(w << 6) + b];
        }
    }
    ++field.n;
}

CoverageField accumulate(const std::vector<Mask>& replicates) {
    if (replicates.empty())
        throw std::invalid_argument("accumulate: no replicates");
    CoverageField f(replicates.front().grid());
    for (const Mask& m : replicates) accumulate(f, m);
    return f;
}

Rational empirical_mean_volume(const CoverageField& field) {
    if (field.n == 0)
        throw std::invalid_argument("empirical_mean_volume: empty field");
    return Rational(int128(field.total_count()),
                    int128(field.n) << (field.grid.level * field.grid.d));
}

CoverageField coarsen_field(const CoverageField& field, int k) {
    if (k > field.grid.level)
        throw std::invalid_argument("coarsen_field: target level finer than field");
    if (k < 0) throw std::invalid_argument("coarsen_field: negative level");
    if (k == field.grid.level) return field;
    GridSpec cg(field.grid.d, k);
    CoverageField out(cg);
    out.n = field.n;
    int shift = field.grid.level - k;
    uint64_t cells = cg.cell_count();
    for (uint64_t c = 0; c < cells; ++c) {
        Coords cc = cell_coords(cg, c);
        Coords bc{cc[0] << shift, cc[1] << shift, cc[2] << shift};
        out.counts[c] = field.counts[cell_linear(field.grid, bc)];
    }
    return out;
}

QuantizedField sample_oracle(const CoverageOracle& oracle, const GridSpec& g,
                             int value_bits) {
    if (value_bits < 1 || value_bits > 30)
        throw std::invalid_argument("sample_oracle: value_bits out of range");
    QuantizedField out;
    out.grid = g;
    out.value_bits = value_bits;
    out.values.resize(g.cell_count());
    double scale = double(uint64_t(1) << value_bits);
    uint64_t cells = g.cell_count();
    for (uint64_t c = 0; c < cells; ++c) {
        double p = oracle.p(cell_center(g, c));
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("sample_oracle: oracle value outside [0,1]");
        out.values[c] = uint32_t(std::llround(p * scale));
    }
    return out;
}

SurvivalCurve SurvivalCurve::from_steps(std::vector<Step> steps, Rational total) {
    for (size_t i = 0; i + 1 < steps.size(); ++i) {
        if (!(steps[i].value < steps[i + 1].value))
            throw std::invalid_argument("SurvivalCurve: values not ascending");
        if (steps[i].f < steps[i + 1].f)
            throw std::invalid_argument("SurvivalCurve: F must be non-increasing");
    }
    if (!steps.empty() && total < steps.front().f)
        throw std::invalid_argument("SurvivalCurve: total below first step");
    SurvivalCurve c;
    c.steps_ = std::move(steps);
    c.total_ = std::move(total);
    return c;
}

Rational SurvivalCurve::eval(const Rational& alpha) const {
    // last step with value <= alpha
    size_t lo = 0, hi = steps_.size();
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (steps_[mid].value <= alpha) lo = mid + 1;
        else hi = mid;
    }
    if (lo == 0) return total_;
    return steps_[lo - 1].f;
}

Rational SurvivalCurve::eval_left(const Rational& alpha) const {
    // last step with value < alpha
    size_t lo = 0, hi = steps_.size();
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (steps_[mid].value < alpha) lo = mid + 1;
        else hi = mid;
    }
    if (lo == 0) return total_;
    return steps_[lo - 1].f;
}

Rational SurvivalCurve::mass_at(const Rational& alpha) const {
    return eval_left(alpha) - eval(alpha);
}

namespace {

// shared construction from a value histogram: hist[v] = number of cells
// with integer value v (value v/denominator); volumes are suffix sums.
SurvivalCurve curve_from_histogram(const std::vector<uint64_t>& hist,
                                   int128 denom, const GridSpec& g) {
    std::vector<SurvivalCurve::Step> steps;
    Rational cell_vol = g.cell_volume();
    // suffix volumes, walked from the top value down
    Rational above(0);
    std::vector<std::pair<size_t, Rational>> rev; // (value, F(value)) top-down
    for (size_t v = hist.size(); v-- > 0;) {
        if (hist[v] == 0) continue;
        rev.emplace_back(v, above);
        above += Rational(int128(hist[v]), 1) * cell_vol;
    }
    steps.reserve(rev.size());
    for (size_t i = rev.size(); i-- > 0;)
        steps.push_back({Rational(int128(rev[i].first), denom), rev[i].second});
    return SurvivalCurve::from_steps(std::move(steps), above);
}

} // namespace

SurvivalCurve survival_curve(const CoverageField& field) {
    if (field.n == 0)
        throw std::invalid_argument("survival_curve: empty field");
    std::vector<uint64_t> hist(size_t(field.n) + 1, 0);
    for (uint32_t c : field.counts) {
        if (c > field.n)
            throw std::invalid_argument("survival_curve: count exceeds n");
        ++hist[c];
    }
    return curve_from_histogram(hist, int128(field.n), field.grid);
}

SurvivalCurve survival_curve(const QuantizedField& field) {
    std::vector<uint64_t> hist((uint64_t(1) << field.value_bits) + 1, 0);
    for (uint32_t v : field.values) {
        if (v >= hist.size())
            throw std::invalid_argument("survival_curve: quantized value out of range");
        ++hist[v];
    }
    return curve_from_histogram(hist, int128(1) << field.value_bits, field.grid);
}

namespace {

// smallest integer count c such that c/denom > alpha (strict) or
// c/denom >= alpha (non-strict); clamped into [0, denom+1]
uint64_t count_threshold(const Rational& alpha, uint64_t denom, bool strict) {
    // c > alpha*denom  <=>  c >= floor(alpha*denom) + 1  (alpha*denom not integer)
    //                       c >= alpha*denom + 1         (integer)
    // c >= alpha*denom <=>  c >= ceil(alpha*denom)
    if (alpha.sign() < 0) return 0;
    int128 num = detail::checked_mul(alpha.num(), int128(denom));
    int128 den = alpha.den();
    int128 q = num / den, r = num % den;
    int128 t;
    if (strict) t = q + 1;
    else t = r == 0 ? q : q + 1;
    if (t < 0) return 0;
    if (t > int128(denom)) return denom + 1; // empty set
    return uint64_t(t);
}

template <typename FieldT>
Mask threshold_mask(const FieldT& field, uint64_t denom,
                    const std::vector<uint32_t>& vals, const Rational& alpha,
                    bool strict) {
    Mask out(field.grid);
    uint64_t t = count_threshold(alpha, denom, strict);
    if (t == 0) {
        // whole cube
        for (uint64_t c = 0; c < field.grid.cell_count(); ++c) out.set(c);
        return out;
    }
    for (uint64_t c = 0; c < vals.size(); ++c)
        if (vals[c] >= t) out.set(c);
    return out;
}

} // namespace

Mask level_set(const CoverageField& field, const Rational& alpha, bool strict) {
    return threshold_mask(field, field.n, field.counts, alpha, strict);
}

Mask level_set(const QuantizedField& field, const Rational& alpha, bool strict) {
    return threshold_mask(field, uint64_t(1) << field.value_bits, field.values,
                          alpha, strict);
}

Mask level_set_grid(const CoverageField& field, const Rational& alpha, int k,
                    bool strict) {
    return grid_approximation(level_set(field, alpha, strict), k);
}

Mask level_set_grid(const QuantizedField& field, const Rational& alpha, int k,
                    bool strict) {
    return grid_approximation(level_set(field, alpha, strict), k);
}

} // namespace rset
