#include "rset/boxdim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace rset {

std::vector<BoxCountRow> box_counts(const Mask& set, const std::vector<int>& levels) {
    const GridSpec& g = set.grid();
    std::vector<BoxCountRow> rows;
    rows.reserve(levels.size());
    for (int k : levels) {
        if (k < 0 || k > g.level)
            throw std::invalid_argument("box_counts: level outside [0, base level]");
        GridSpec cg(g.d, k);
        Mask cover(cg);
        int shift = g.level - k;
        const auto& words = set.words();
        for (size_t w = 0; w < words.size(); ++w) {
            uint64_t bits = words[w];
            while (bits) {
                int b = std::countr_zero(bits);
                bits &= bits - 1;
                Coords bc = cell_coords(g, (uint64_t(w) << 6) + b);
                Coords cc{bc[0] >> shift, bc[1] >> shift, bc[2] >> shift};
                cover.set(cell_linear(cg, cc));
            }
        }
        rows.push_back({k, std::ldexp(1.0, -k), cover.count()});
    }
    return rows;
}

BoxCountReport fit_box_dim(const std::vector<BoxCountRow>& rows, int d,
                           int fit_lo, int fit_hi) {
    BoxCountReport rep;
    rep.rows = rows;
    rep.fit_lo = fit_lo;
    rep.fit_hi = fit_hi;

    std::vector<double> xs, ys;
    for (const auto& row : rows) {
        if (row.k < fit_lo || row.k > fit_hi || row.n_r == 0) continue;
        xs.push_back(row.k * std::log(2.0)); // -log r
        ys.push_back(std::log(double(row.n_r)));
    }
    if (xs.size() < 3)
        throw std::runtime_error(
            "fit_box_dim: insufficient scales (need at least 3 usable rows)");

    double xbar = 0, ybar = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= double(xs.size());
    ybar /= double(xs.size());
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
    }
    double slope = sxy / sxx;
    double intercept = ybar - slope * xbar;
    rep.rss = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double e = ys[i] - (intercept + slope * xs[i]);
        rep.rss += e * e;
    }
    rep.slope = std::clamp(slope, 0.0, double(d));
    return rep;
}

BoxCountReport estimate_box_dim(const std::vector<BoxCountRow>& rows, int d) {
    std::vector<int> usable;
    for (const auto& r : rows)
        if (r.n_r > 0) usable.push_back(r.k);
    if (usable.size() < 3)
        throw std::runtime_error(
            "estimate_box_dim: insufficient scales (need at least 3 usable rows)");
    std::sort(usable.begin(), usable.end());
    // drop the two coarsest and the finest level; both ends flatten once
    // the cell size leaves the scaling range
    size_t lo_idx = std::min<size_t>(2, usable.size() - 1);
    size_t hi_idx = usable.size() >= 2 ? usable.size() - 2 : usable.size() - 1;
    if (hi_idx < lo_idx || hi_idx - lo_idx + 1 < 3)
        throw std::runtime_error(
            "estimate_box_dim: insufficient scales after trimming the fit window");
    return fit_box_dim(rows, d, usable[lo_idx], usable[hi_idx]);
}

Prop1Report check_prop1(const Mask& set, const std::vector<int>& levels,
                        double eps) {
    if (!(eps > 0))
        throw std::invalid_argument("check_prop1: eps must be positive");
    const GridSpec& g = set.grid();
    Prop1Report rep;
    rep.eps = eps;

    Mask bdry = boundary_cells(set);
    if (bdry.empty()) {
        rep.dim_hat = 0; // clopen in the discrete cube; no boundary to measure
    } else {
        rep.dim_hat = estimate_box_dim(box_counts(bdry, levels), g.d).slope;
    }
    double expo = g.d - rep.dim_hat - eps;
    if (!(expo > 0))
        throw std::invalid_argument(
            "check_prop1: d - dim_hat - eps must be positive");

    for (int k : levels) {
        Mask approx = refine(grid_approximation(set, k), g.level);
        double delta = symm_diff_volume(approx, set).to_double();
        double r = std::ldexp(1.0, -k);
        Prop1Row row{k, r, delta, std::pow(r, expo), true};
        row.ok = delta <= row.bound;
        rep.all_ok = rep.all_ok && row.ok;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace rset
