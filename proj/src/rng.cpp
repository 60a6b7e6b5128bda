#include "rset/rng.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace rset {

namespace {

// log(k!) for k < 1024, filled on first use.  The PTRS sampler only needs
// it for candidate values near the mean, and means that large are outside
// anything the simulators produce; fall back to lgamma beyond the table.
double log_factorial(uint64_t k) {
    static const std::array<double, 1024> table = [] {
        std::array<double, 1024> t{};
        t[0] = 0.0;
        for (size_t i = 1; i < t.size(); ++i)
            t[i] = t[i - 1] + std::log(double(i));
        return t;
    }();
    if (k < table.size()) return table[k];
    return std::lgamma(double(k) + 1.0);
}

} // namespace

uint64_t Substream::poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be nonnegative");
    if (mean == 0.0) return 0;

    if (mean < 10.0) {
        // inversion by sequential search
        double p = std::exp(-mean);
        double acc = p;
        double u = next_unit();
        uint64_t k = 0;
        while (u > acc) {
            ++k;
            p *= mean / double(k);
            acc += p;
            if (p < 1e-300 && k > mean) break;
        }
        return k;
    }

    // transformed rejection with squeeze (Hormann's PTRS)
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);

    for (;;) {
        double u = next_unit() - 0.5;
        double v = next_unit();
        double us = 0.5 - std::abs(u);
        double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (kd < 0.0) continue;
        if (us >= 0.07 && v <= v_r) return uint64_t(kd);
        if (us < 0.013 && v > us) continue;
        double k = kd;
        double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        double rhs = k * log_mean - mean - log_factorial(uint64_t(kd));
        if (lhs <= rhs) return uint64_t(kd);
    }
}

} // namespace rset
