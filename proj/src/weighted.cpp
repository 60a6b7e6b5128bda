#include "rset/weighted.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace rset {

Rational WeightedMask::weight(uint64_t cell) const {
    if (ones_.test(cell)) return Rational(1);
    auto it = std::lower_bound(frac_.begin(), frac_.end(), cell,
                               [](const auto& p, uint64_t c) { return p.first < c; });
    if (it != frac_.end() && it->first == cell) return it->second;
    return Rational(0);
}

void WeightedMask::set_weight(uint64_t cell, const Rational& w) {
    if (w.sign() < 0 || w > Rational(1))
        throw std::invalid_argument("WeightedMask: weight outside [0,1]");
    if (w == Rational(1)) {
        ones_.set(cell);
        return;
    }
    if (w.is_zero()) {
        ones_.set(cell, false);
        return;
    }
    ones_.set(cell, false);
    frac_.emplace_back(cell, w);
    if (frac_.size() > 1 && frac_[frac_.size() - 2].first > cell)
        normalize_fractional();
}

void WeightedMask::normalize_fractional() {
    std::sort(frac_.begin(), frac_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 1; i < frac_.size(); ++i)
        if (frac_[i - 1].first == frac_[i].first)
            throw std::invalid_argument("WeightedMask: duplicate fractional cell");
}

Rational WeightedMask::volume() const {
    Rational sum(int128(ones_.count()), 1);
    for (const auto& [cell, w] : frac_) sum += w;
    return sum * grid().cell_volume();
}

static Rational weighted_symm_diff(const WeightedMask& a, const WeightedMask& b) {
    if (a.grid() != b.grid())
        throw std::invalid_argument("symm_diff_volume: grids differ");
    // cells whose weights are both 0/1 contribute through the xor count;
    // cells fractional on either side are patched individually.
    uint64_t xor_count = 0;
    const auto& wa = a.ones().words();
    const auto& wb = b.ones().words();
    for (size_t i = 0; i < wa.size(); ++i)
        xor_count += std::popcount(wa[i] ^ wb[i]);

    Rational frac_sum(0);
    int64_t correction = 0;
    auto ia = a.fractional().begin(), ea = a.fractional().end();
    auto ib = b.fractional().begin(), eb = b.fractional().end();
    auto patch = [&](uint64_t cell) {
        Rational va = a.weight(cell), vb = b.weight(cell);
        if (a.ones().test(cell) != b.ones().test(cell)) correction -= 1;
        frac_sum += abs(va - vb);
    };
    while (ia != ea || ib != eb) {
        if (ib == eb || (ia != ea && ia->first < ib->first)) {
            patch(ia->first);
            ++ia;
        } else if (ia == ea || ib->first < ia->first) {
            patch(ib->first);
            ++ib;
        } else {
            patch(ia->first);
            ++ia;
            ++ib;
        }
    }
    Rational cells = Rational(int128(int64_t(xor_count) + correction), 1) + frac_sum;
    return cells * a.grid().cell_volume();
}

Rational symm_diff_volume(const WeightedMask& a, const WeightedMask& b) {
    return weighted_symm_diff(a, b);
}
Rational symm_diff_volume(const WeightedMask& a, const Mask& b) {
    return weighted_symm_diff(a, WeightedMask::from_mask(b));
}
Rational symm_diff_volume(const Mask& a, const WeightedMask& b) {
    return weighted_symm_diff(WeightedMask::from_mask(a), b);
}

WeightedMask refine(const WeightedMask& coarse, int K) {
    WeightedMask out = WeightedMask::from_mask(refine(coarse.ones(), K));
    if (coarse.fractional().empty()) return out;
    const GridSpec& g = coarse.grid();
    GridSpec fg = out.grid();
    int shift = K - g.level;
    uint64_t block = uint64_t(1) << shift;
    for (const auto& [cell, w] : coarse.fractional()) {
        Coords cc = cell_coords(g, cell);
        uint64_t zmax = g.d > 2 ? block : 1;
        uint64_t ymax = g.d > 1 ? block : 1;
        for (uint64_t dz = 0; dz < zmax; ++dz)
            for (uint64_t dy = 0; dy < ymax; ++dy)
                for (uint64_t dx = 0; dx < block; ++dx) {
                    Coords f{uint32_t((uint64_t(cc[0]) << shift) + dx),
                             uint32_t((uint64_t(cc[1]) << shift) + dy),
                             uint32_t((uint64_t(cc[2]) << shift) + dz)};
                    out.set_weight(cell_linear(fg, f), w);
                }
    }
    out.normalize_fractional();
    return out;
}

} // namespace rset
