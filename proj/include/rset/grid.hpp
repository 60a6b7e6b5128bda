#pragma once

// Dyadic grids on the unit cube and bit-packed cell masks.
//
// A level-k grid splits [0,1)^d into 2^(k*d) half-open cells
// [x, x + r)^d with r = 2^-k and x on the lattice r*Z^d.  A Mask is the
// indicator of a finite union of such cells; the continuous set it stands
// for is the disjoint union of its cells.  Linear cell index runs with
// axis 0 fastest: index = i0 + 2^k * (i1 + 2^k * i2).

#include <array>
#include <cstdint>
#include <vector>

#include "rset/rational.hpp"

namespace rset {

struct GridSpec {
    int d = 2;     // dimension, 1..3
    int level = 0; // k; mesh r = 2^-k

    GridSpec() = default;
    GridSpec(int dim, int k);

    uint64_t cells_per_axis() const { return uint64_t(1) << level; }
    uint64_t cell_count() const { return uint64_t(1) << (uint64_t(level) * d); }
    double mesh() const { return 1.0 / double(cells_per_axis()); }
    Rational cell_volume() const {
        return Rational(int128(1), int128(1) << (level * d));
    }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.d == b.d && a.level == b.level;
    }
    friend bool operator!=(const GridSpec& a, const GridSpec& b) { return !(a == b); }
};

using Coords = std::array<uint32_t, 3>; // unused trailing axes are 0

inline uint64_t cell_linear(const GridSpec& g, const Coords& c) {
    uint64_t n = g.cells_per_axis();
    uint64_t idx = c[0];
    if (g.d > 1) idx += n * uint64_t(c[1]);
    if (g.d > 2) idx += n * n * uint64_t(c[2]);
    return idx;
}

inline Coords cell_coords(const GridSpec& g, uint64_t cell) {
    uint64_t n = g.cells_per_axis();
    Coords c{0, 0, 0};
    c[0] = uint32_t(cell % n);
    if (g.d > 1) c[1] = uint32_t((cell / n) % n);
    if (g.d > 2) c[2] = uint32_t(cell / (n * n));
    return c;
}

// center of a cell, for point-sampling rules
inline std::array<double, 3> cell_center(const GridSpec& g, uint64_t cell) {
    Coords c = cell_coords(g, cell);
    double r = g.mesh();
    return {(double(c[0]) + 0.5) * r, (double(c[1]) + 0.5) * r,
            (double(c[2]) + 0.5) * r};
}

class Mask {
public:
    Mask() = default;
    explicit Mask(const GridSpec& g)
        : grid_(g), words_((g.cell_count() + 63) / 64, 0) {}

    const GridSpec& grid() const { return grid_; }

    bool test(uint64_t cell) const {
        return (words_[cell >> 6] >> (cell & 63)) & 1u;
    }
    void set(uint64_t cell, bool v = true) {
        uint64_t m = uint64_t(1) << (cell & 63);
        if (v) words_[cell >> 6] |= m;
        else   words_[cell >> 6] &= ~m;
    }
    // set cells [first, last) in one row; caller keeps the range inside a row
    void set_run(uint64_t first, uint64_t last);

    uint64_t count() const;
    bool empty() const;

    const std::vector<uint64_t>& words() const { return words_; }
    std::vector<uint64_t>& words() { return words_; }

    uint64_t linear(const Coords& c) const { return cell_linear(grid_, c); }
    Coords coords(uint64_t cell) const { return cell_coords(grid_, cell); }

    friend bool operator==(const Mask& a, const Mask& b) {
        return a.grid_ == b.grid_ && a.words_ == b.words_;
    }
    friend bool operator!=(const Mask& a, const Mask& b) { return !(a == b); }

private:
    GridSpec grid_;
    std::vector<uint64_t> words_;
};

// Lebesgue measure of the union of cells: count * r^d, exact.
Rational volume(const Mask& m);

// lambda(A xor B), exact; A and B must share a GridSpec.
Rational symm_diff_volume(const Mask& a, const Mask& b);

Mask mask_and(const Mask& a, const Mask& b);
Mask mask_or(const Mask& a, const Mask& b);
Mask mask_xor(const Mask& a, const Mask& b);

// Coarsening by anchor sampling: level-k cell [x, x+2^-k)^d is kept iff its
// anchor lattice point x lies in the set, i.e. iff the base cell whose
// anchor is x is set.  Requires k <= base level; refusal to fabricate
// sub-cell data means no refinement through this call.
Mask grid_approximation(const Mask& base, int k);

// Inverse embedding: each coarse cell becomes a full block of level-K
// cells.  Exact (the continuous set is unchanged); K >= coarse level.
Mask refine(const Mask& coarse, int K);

// Closed-ball rasterization by the cell-center rule: a cell is set iff its
// center lies within ball(center, radius), intersected with the cube.  The
// center may lie outside [0,1]^d.
Mask rasterize_ball(const GridSpec& g, const std::array<double, 3>& center,
                    double radius);

// union the ball into an existing mask (simulators build unions of grains)
void rasterize_ball_into(Mask& out, const std::array<double, 3>& center,
                         double radius);

// Discrete topological boundary: cells with at least one face-neighbor
// inside the cube carrying the opposite indicator.  A full (or empty) mask
// has no such pair, hence an empty boundary.
Mask boundary_cells(const Mask& m);

} // namespace rset
