#include "rset/boolean_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rset {

RadiusLaw RadiusLaw::dirac(double r0) {
    if (!(r0 > 0.0)) throw std::invalid_argument("radius: Dirac radius must be positive");
    return RadiusLaw{RadiusKind::Dirac, r0, r0};
}

RadiusLaw RadiusLaw::uniform(double lo, double hi) {
    if (!(lo >= 0.0) || !(hi > lo))
        throw std::invalid_argument("radius: Uniform needs 0 <= a < b");
    return RadiusLaw{RadiusKind::Uniform, lo, hi};
}

double RadiusLaw::moment(int j) const {
    if (j < 0) throw std::invalid_argument("radius moment: order must be nonnegative");
    if (j == 0) return 1.0;
    if (kind == RadiusKind::Dirac) return std::pow(a, j);
    // (b^{j+1} - a^{j+1}) / ((j+1)(b - a))
    return (std::pow(b, j + 1) - std::pow(a, j + 1)) / (double(j + 1) * (b - a));
}

double RadiusLaw::tail(double t) const {
    if (kind == RadiusKind::Dirac) return t < a ? 1.0 : 0.0;
    if (t < a) return 1.0;
    if (t >= b) return 0.0;
    return (b - t) / (b - a);
}

double RadiusLaw::max_radius() const { return kind == RadiusKind::Dirac ? a : b; }

bool RadiusLaw::smooth_density() const { return kind == RadiusKind::Uniform; }

double RadiusLaw::sample(Substream& rng) const {
    if (kind == RadiusKind::Dirac) return a;
    return rng.uniform(a, b);
}

double IntensityModel::density(int d, const std::array<double, 3>& x) const {
    switch (kind) {
    case IntensityKind::Constant:
        return m0;
    case IntensityKind::SeparableBump: {
        double s = 1.0;
        for (int j = 0; j < d; ++j) s *= std::sin(M_PI * x[j]);
        return m0 + m1 * s;
    }
    case IntensityKind::GaussianBump: {
        double s = 1.0;
        for (int j = 0; j < d; ++j) {
            double z = (x[j] - center[j]) / width;
            s *= std::exp(-0.5 * z * z);
        }
        return m0 + amplitude * s;
    }
    }
    return 0.0;
}

double IntensityModel::mass(int d) const {
    switch (kind) {
    case IntensityKind::Constant:
        return m0;
    case IntensityKind::SeparableBump:
        // integral of sin(pi t) over [0,1] is 2/pi per axis
        return m0 + m1 * std::pow(2.0 / M_PI, d);
    case IntensityKind::GaussianBump: {
        double s = 1.0;
        for (int j = 0; j < d; ++j) {
            double inv = 1.0 / (width * std::sqrt(2.0));
            s *= width * std::sqrt(M_PI / 2.0) *
                 (std::erf((1.0 - center[j]) * inv) - std::erf((0.0 - center[j]) * inv));
        }
        return m0 + amplitude * s;
    }
    }
    return 0.0;
}

double IntensityModel::envelope(int d) const {
    (void)d;
    switch (kind) {
    case IntensityKind::Constant: return m0;
    case IntensityKind::SeparableBump: return m0 + m1;
    case IntensityKind::GaussianBump: return m0 + amplitude;
    }
    return 0.0;
}

std::array<double, 3> IntensityModel::sample_position(int d, Substream& rng) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    switch (kind) {
    case IntensityKind::Constant:
        for (int j = 0; j < d; ++j) x[j] = rng.next_unit();
        return x;
    case IntensityKind::SeparableBump: {
        // mixture of the flat part and the product-sine part, each with a
        // per-axis inverse CDF
        double bump_mass = m1 * std::pow(2.0 / M_PI, d);
        bool bump = rng.next_unit() * (m0 + bump_mass) >= m0;
        for (int j = 0; j < d; ++j) {
            double u = rng.next_unit();
            x[j] = bump ? std::acos(1.0 - 2.0 * u) / M_PI : u;
        }
        return x;
    }
    case IntensityKind::GaussianBump: {
        double env = envelope(d);
        for (;;) {
            for (int j = 0; j < d; ++j) x[j] = rng.next_unit();
            if (rng.next_unit() * env <= density(d, x)) return x;
        }
    }
    }
    return x;
}

void BooleanConfig::validate() const {
    if (model == ModelKind::Stationary && intensity.kind != IntensityKind::Constant)
        throw std::invalid_argument(
            "model: stationary requires constant intensity (coverage is the "
            "constant 1 - exp(-m0 * omega_d * E R^d) only then)");
    if (intensity.m0 < 0.0 || intensity.m1 < 0.0 || intensity.amplitude < 0.0)
        throw std::invalid_argument("intensity: coefficients must be nonnegative");
    if (intensity.kind == IntensityKind::GaussianBump && !(intensity.width > 0.0))
        throw std::invalid_argument("intensity.width: must be positive");
    if (radius.kind == RadiusKind::Uniform && !(radius.a >= 0.0 && radius.b > radius.a))
        throw std::invalid_argument("radius: Uniform needs 0 <= a < b");
    if (radius.kind == RadiusKind::Dirac && !(radius.a > 0.0))
        throw std::invalid_argument("radius: Dirac radius must be positive");
    if (model == ModelKind::Atoms) {
        if (atoms.empty())
            throw std::invalid_argument("atoms: model needs at least one atom");
        if (!(atom_radius > 0.0))
            throw std::invalid_argument("atoms.r0: must be positive");
        for (const Atom& at : atoms)
            if (at.q < 0.0 || at.q > 1.0)
                throw std::invalid_argument("atoms.q: must lie in [0, 1]");
    } else if (!atoms.empty()) {
        throw std::invalid_argument("atoms: listed but model is not atoms");
    }
}

std::array<double, 3> BooleanConfig::window_lo() const {
    double lo = model == ModelKind::Stationary ? -radius.max_radius() : 0.0;
    return {lo, lo, lo};
}

std::array<double, 3> BooleanConfig::window_hi() const {
    double hi = model == ModelKind::Stationary ? 1.0 + radius.max_radius() : 1.0;
    return {hi, hi, hi};
}

Mask simulate(const BooleanConfig& cfg, uint64_t replicate_index) {
    cfg.validate();
    Substream rng(cfg.seed, replicate_index, 0);
    Mask out(cfg.grid);
    int d = cfg.grid.d;

    auto lo = cfg.window_lo();
    auto hi = cfg.window_hi();
    double window_mass;
    if (cfg.model == ModelKind::Stationary) {
        double side = hi[0] - lo[0];
        window_mass = cfg.intensity.m0 * std::pow(side, d);
    } else {
        window_mass = cfg.intensity.mass(d);
    }

    uint64_t germs = rng.poisson(window_mass);
    for (uint64_t gi = 0; gi < germs; ++gi) {
        std::array<double, 3> pos{0.0, 0.0, 0.0};
        if (cfg.model == ModelKind::Stationary) {
            for (int j = 0; j < d; ++j) pos[j] = rng.uniform(lo[j], hi[j]);
        } else {
            pos = cfg.intensity.sample_position(d, rng);
        }
        double rad = cfg.radius.sample(rng);
        rasterize_ball_into(out, pos, rad);
    }

    if (cfg.model == ModelKind::Atoms)
        for (const Atom& at : cfg.atoms)
            if (rng.bernoulli(at.q))
                rasterize_ball_into(out, at.center, cfg.atom_radius);

    return out;
}

std::vector<Mask> simulate_batch(const BooleanConfig& cfg, uint64_t first,
                                 uint64_t count) {
    std::vector<Mask> out;
    out.reserve(count);
    for (uint64_t i = 0; i < count; ++i) out.push_back(simulate(cfg, first + i));
    return out;
}

double unit_ball_volume(int d) {
    switch (d) {
    case 1: return 2.0;
    case 2: return M_PI;
    case 3: return 4.0 * M_PI / 3.0;
    }
    throw std::invalid_argument("unit_ball_volume: dimension out of range");
}

double stationary_coverage_level(const BooleanConfig& cfg) {
    if (cfg.model != ModelKind::Stationary)
        throw std::invalid_argument("coverage level: model is not stationary");
    cfg.validate();
    int d = cfg.grid.d;
    return 1.0 -
           std::exp(-cfg.intensity.m0 * unit_ball_volume(d) * cfg.radius.moment(d));
}

double phi(const BooleanConfig& cfg, const std::array<double, 3>& x,
           int quad_level) {
    if (cfg.model == ModelKind::Stationary)
        throw std::invalid_argument(
            "phi: stationary germs are not confined to the cube, the cube "
            "integral does not describe that model");
    if (quad_level < 0) quad_level = cfg.grid.level + 2;
    if (quad_level > 14)
        throw std::invalid_argument("phi: quadrature level too fine");

    int d = cfg.grid.d;
    double h = std::ldexp(1.0, -quad_level);
    int64_t nq = int64_t(1) << quad_level;
    double rmax = cfg.radius.max_radius();

    // index window around x; the tail vanishes beyond rmax
    int64_t blo[3] = {0, 0, 0}, bhi[3] = {0, 0, 0};
    for (int j = 0; j < d; ++j) {
        blo[j] = int64_t(std::floor((x[j] - rmax) / h - 0.5)) - 1;
        bhi[j] = int64_t(std::ceil((x[j] + rmax) / h - 0.5)) + 1;
        if (blo[j] < 0) blo[j] = 0;
        if (bhi[j] > nq - 1) bhi[j] = nq - 1;
    }

    double r2max = rmax * rmax;
    double acc = 0.0;
    std::array<double, 3> y{0.0, 0.0, 0.0};
    for (int64_t k = blo[2]; k <= bhi[2]; ++k) {
        y[2] = d > 2 ? (double(k) + 0.5) * h : 0.0;
        double dz = d > 2 ? y[2] - x[2] : 0.0;
        for (int64_t j = blo[1]; j <= bhi[1]; ++j) {
            y[1] = d > 1 ? (double(j) + 0.5) * h : 0.0;
            double dy = d > 1 ? y[1] - x[1] : 0.0;
            double off2 = dy * dy + dz * dz;
            if (off2 > r2max) continue;
            for (int64_t i = blo[0]; i <= bhi[0]; ++i) {
                y[0] = (double(i) + 0.5) * h;
                double dx = y[0] - x[0];
                double dist2 = dx * dx + off2;
                if (dist2 > r2max) continue;
                double t = cfg.radius.tail(std::sqrt(dist2));
                if (t > 0.0) acc += t * cfg.intensity.density(d, y);
            }
        }
    }
    return acc * std::pow(h, d);
}

double analytic_coverage(const BooleanConfig& cfg, const std::array<double, 3>& x,
                         int quad_level) {
    if (cfg.model == ModelKind::Stationary) return stationary_coverage_level(cfg);
    double miss = std::exp(-phi(cfg, x, quad_level));
    if (cfg.model == ModelKind::Atoms) {
        double r2 = cfg.atom_radius * cfg.atom_radius;
        for (const Atom& at : cfg.atoms) {
            double dist2 = 0.0;
            for (int j = 0; j < cfg.grid.d; ++j) {
                double dj = x[j] - at.center[j];
                dist2 += dj * dj;
            }
            if (dist2 <= r2) miss *= 1.0 - at.q;
        }
    }
    return 1.0 - miss;
}

CoverageOracle coverage_oracle(const BooleanConfig& cfg, int quad_level) {
    cfg.validate();
    CoverageOracle o;
    std::string src;
    if (cfg.model == ModelKind::Stationary)
        src = "constant level 1 - exp(-m0 * omega_d * E R^d)";
    else
        src = "midpoint quadrature of the radius-tail integral at mesh 2^-" +
              std::to_string(quad_level < 0 ? cfg.grid.level + 2 : quad_level);
    BooleanConfig copy = cfg;
    o.p = [copy, quad_level](const std::array<double, 3>& x) {
        return analytic_coverage(copy, x, quad_level);
    };
    o.source = src;
    return o;
}

} // namespace rset
