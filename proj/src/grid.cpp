#include "rset/grid.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace rset {

GridSpec::GridSpec(int dim, int k) : d(dim), level(k) {
    if (d < 1 || d > 3)
        throw std::invalid_argument("GridSpec: dimension must be 1, 2 or 3");
    if (k < 0)
        throw std::invalid_argument("GridSpec: level must be non-negative");
    if (uint64_t(k) * d > 40)
        throw std::invalid_argument("GridSpec: grid too fine (level*d > 40)");
}

void Mask::set_run(uint64_t first, uint64_t last) {
    if (first >= last) return;
    uint64_t w0 = first >> 6, w1 = (last - 1) >> 6;
    uint64_t lo = first & 63, hi = (last - 1) & 63;
    if (w0 == w1) {
        words_[w0] |= (~uint64_t(0) << lo) & (~uint64_t(0) >> (63 - hi));
        return;
    }
    words_[w0] |= ~uint64_t(0) << lo;
    for (uint64_t w = w0 + 1; w < w1; ++w) words_[w] = ~uint64_t(0);
    words_[w1] |= ~uint64_t(0) >> (63 - hi);
}

uint64_t Mask::count() const {
    uint64_t c = 0;
    for (uint64_t w : words_) c += std::popcount(w);
    return c;
}

bool Mask::empty() const {
    for (uint64_t w : words_)
        if (w) return false;
    return true;
}

Rational volume(const Mask& m) {
    return Rational(int128(m.count()), int128(1) << (m.grid().level * m.grid().d));
}

static void require_same_grid(const Mask& a, const Mask& b, const char* op) {
    if (a.grid() != b.grid())
        throw std::invalid_argument(std::string(op) + ": grids differ");
}

Rational symm_diff_volume(const Mask& a, const Mask& b) {
    require_same_grid(a, b, "symm_diff_volume");
    uint64_t c = 0;
    const auto& wa = a.words();
    const auto& wb = b.words();
    for (size_t i = 0; i < wa.size(); ++i) c += std::popcount(wa[i] ^ wb[i]);
    return Rational(int128(c), int128(1) << (a.grid().level * a.grid().d));
}

Mask mask_and(const Mask& a, const Mask& b) {
    require_same_grid(a, b, "mask_and");
    Mask out = a;
    for (size_t i = 0; i < out.words().size(); ++i) out.words()[i] &= b.words()[i];
    return out;
}

Mask mask_or(const Mask& a, const Mask& b) {
    require_same_grid(a, b, "mask_or");
    Mask out = a;
    for (size_t i = 0; i < out.words().size(); ++i) out.words()[i] |= b.words()[i];
    return out;
}

Mask mask_xor(const Mask& a, const Mask& b) {
    require_same_grid(a, b, "mask_xor");
    Mask out = a;
    for (size_t i = 0; i < out.words().size(); ++i) out.words()[i] ^= b.words()[i];
    return out;
}

Mask grid_approximation(const Mask& base, int k) {
    const GridSpec& g = base.grid();
    if (k > g.level)
        throw std::invalid_argument(
            "grid_approximation: target level finer than the mask; refinement "
            "would fabricate sub-cell data");
    if (k < 0) throw std::invalid_argument("grid_approximation: negative level");
    if (k == g.level) return base;

    GridSpec cg(g.d, k);
    Mask out(cg);
    int shift = g.level - k; // coarse coordinate -> base anchor coordinate
    Coords bc{0, 0, 0};
    uint64_t cells = cg.cell_count();
    for (uint64_t c = 0; c < cells; ++c) {
        Coords cc = out.coords(c);
        bc[0] = cc[0] << shift;
        bc[1] = cc[1] << shift;
        bc[2] = cc[2] << shift;
        if (base.test(base.linear(bc))) out.set(c);
    }
    return out;
}

Mask refine(const Mask& coarse, int K) {
    const GridSpec& g = coarse.grid();
    if (K < g.level)
        throw std::invalid_argument("refine: target level coarser than the mask");
    if (K == g.level) return coarse;

    GridSpec fg(g.d, K);
    Mask out(fg);
    int shift = K - g.level;
    uint64_t block = uint64_t(1) << shift; // block edge in fine cells
    uint64_t cells = g.cell_count();
    for (uint64_t c = 0; c < cells; ++c) {
        if (!coarse.test(c)) continue;
        Coords cc = coarse.coords(c);
        uint64_t x0 = uint64_t(cc[0]) << shift;
        uint64_t y0 = g.d > 1 ? uint64_t(cc[1]) << shift : 0;
        uint64_t z0 = g.d > 2 ? uint64_t(cc[2]) << shift : 0;
        uint64_t zmax = g.d > 2 ? block : 1;
        uint64_t ymax = g.d > 1 ? block : 1;
        for (uint64_t dz = 0; dz < zmax; ++dz)
            for (uint64_t dy = 0; dy < ymax; ++dy) {
                Coords f{uint32_t(x0), uint32_t(y0 + dy), uint32_t(z0 + dz)};
                uint64_t first = out.linear(f);
                out.set_run(first, first + block);
            }
    }
    return out;
}

void rasterize_ball_into(Mask& out, const std::array<double, 3>& center,
                         double radius) {
    if (!(radius > 0.0))
        throw std::invalid_argument("rasterize_ball: radius must be positive");
    const GridSpec& g = out.grid();
    double r = g.mesh();
    int64_t n = int64_t(g.cells_per_axis());
    double r2 = radius * radius;

    // cell-center membership test; the row fill below must agree with it
    auto center_of = [&](int64_t i) { return (double(i) + 0.5) * r; };

    auto row_range = [&](double off2, double cx, int64_t& lo, int64_t& hi) {
        // cells i with (center_of(i) - cx)^2 + off2 <= r2
        double s2 = r2 - off2;
        if (s2 < 0) { lo = 1; hi = 0; return; }
        double s = std::sqrt(s2);
        lo = int64_t(std::ceil((cx - s) / r - 0.5));
        hi = int64_t(std::floor((cx + s) / r - 0.5));
        auto inside = [&](int64_t i) {
            double dx = center_of(i) - cx;
            return dx * dx + off2 <= r2;
        };
        // float endpoints can be off by one cell; settle against the test
        while (inside(lo - 1)) --lo;
        while (lo <= hi && !inside(lo)) ++lo;
        while (inside(hi + 1)) ++hi;
        while (hi >= lo && !inside(hi)) --hi;
        if (lo < 0) lo = 0;
        if (hi > n - 1) hi = n - 1;
    };

    int64_t zlo = 0, zhi = 0, ylo = 0, yhi = 0;
    if (g.d == 1) {
        int64_t lo, hi;
        row_range(0.0, center[0], lo, hi);
        if (lo <= hi) out.set_run(uint64_t(lo), uint64_t(hi) + 1);
        return;
    }
    if (g.d == 3) {
        zlo = int64_t(std::floor((center[2] - radius) / r - 0.5)) - 1;
        zhi = int64_t(std::ceil((center[2] + radius) / r - 0.5)) + 1;
        if (zlo < 0) zlo = 0;
        if (zhi > n - 1) zhi = n - 1;
    }
    ylo = int64_t(std::floor((center[1] - radius) / r - 0.5)) - 1;
    yhi = int64_t(std::ceil((center[1] + radius) / r - 0.5)) + 1;
    if (ylo < 0) ylo = 0;
    if (yhi > n - 1) yhi = n - 1;

    for (int64_t z = zlo; z <= zhi; ++z) {
        double dz = g.d > 2 ? center_of(z) - center[2] : 0.0;
        for (int64_t y = ylo; y <= yhi; ++y) {
            double dy = center_of(y) - center[1];
            int64_t lo, hi;
            row_range(dy * dy + dz * dz, center[0], lo, hi);
            if (lo > hi) continue;
            Coords c{uint32_t(lo), uint32_t(y), uint32_t(z)};
            uint64_t first = out.linear(c);
            out.set_run(first, first + uint64_t(hi - lo) + 1);
        }
    }
}

Mask rasterize_ball(const GridSpec& g, const std::array<double, 3>& center,
                    double radius) {
    Mask out(g);
    rasterize_ball_into(out, center, radius);
    return out;
}

Mask boundary_cells(const Mask& m) {
    const GridSpec& g = m.grid();
    Mask out(g);
    uint64_t n = g.cells_per_axis();
    uint64_t strides[3] = {1, n, n * n};
    uint64_t cells = g.cell_count();
    for (uint64_t c = 0; c < cells; ++c) {
        Coords cc = m.coords(c);
        bool v = m.test(c);
        for (int ax = 0; ax < g.d; ++ax) {
            if (cc[ax] + 1 < n && m.test(c + strides[ax]) != v) {
                out.set(c);
                out.set(c + strides[ax]);
            }
        }
    }
    return out;
}

} // namespace rset
