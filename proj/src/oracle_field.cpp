#include "rset/oracle_field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace rset {

namespace {

// smallest size >= n whose factors are all in {2, 3, 5, 7}
int next_smooth(int n) {
    for (int p = n;; ++p) {
        int q = p;
        for (int f : {2, 3, 5, 7})
            while (q % f == 0) q /= f;
        if (q == 1) return p;
    }
}

struct FftwDeleter {
    void operator()(double* p) const { fftw_free(p); }
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

std::string fingerprint(const BooleanConfig& cfg, int quad_level) {
    char buf[256];
    std::string s;
    std::snprintf(buf, sizeof buf, "m%d i%d %.17g %.17g %.17g %.17g %.17g %.17g %.17g",
                  int(cfg.model), int(cfg.intensity.kind), cfg.intensity.m0,
                  cfg.intensity.m1, cfg.intensity.amplitude, cfg.intensity.center[0],
                  cfg.intensity.center[1], cfg.intensity.center[2],
                  cfg.intensity.width);
    s += buf;
    std::snprintf(buf, sizeof buf, " r%d %.17g %.17g g%d/%d q%d a%.17g",
                  int(cfg.radius.kind), cfg.radius.a, cfg.radius.b, cfg.grid.d,
                  cfg.grid.level, quad_level, cfg.atom_radius);
    s += buf;
    for (const Atom& at : cfg.atoms) {
        std::snprintf(buf, sizeof buf, " (%.17g,%.17g,%.17g;%.17g)", at.center[0],
                      at.center[1], at.center[2], at.q);
        s += buf;
    }
    return s;
}

// the full phase-split convolution; returns phi per base cell
std::vector<double> compute_phi_field(const BooleanConfig& cfg, int Q) {
    const int d = cfg.grid.d;
    const int K = cfg.grid.level;
    const int64_t nk = int64_t(1) << K;
    const int64_t s = int64_t(1) << (Q - K);
    const double h = std::ldexp(1.0, -Q);
    const double off = double(s - 1) / 2.0;
    const double rmax = cfg.radius.max_radius();

    // kernel half-width in coarse cells: beyond it the tail is zero
    const int64_t W = int64_t(rmax * double(nk)) + 2;
    const int P = next_smooth(int(nk + 2 * W + 1));
    const int Pc = P / 2 + 1; // r2c size along the fastest axis

    int64_t real_n = 1, spec_n = 1;
    for (int ax = 0; ax < d; ++ax) {
        real_n *= P;
        spec_n *= ax == 0 ? Pc : P;
    }

    std::unique_ptr<double[], FftwDeleter> re(fftw_alloc_real(real_n));
    std::unique_ptr<fftw_complex[], FftwDeleter> spec(fftw_alloc_complex(spec_n));
    std::unique_ptr<fftw_complex[], FftwDeleter> mspec(fftw_alloc_complex(spec_n));
    std::unique_ptr<fftw_complex[], FftwDeleter> acc(fftw_alloc_complex(spec_n));
    if (!re || !spec || !mspec || !acc) throw std::bad_alloc();

    // FFTW wants the fastest-varying axis last; our axis 0 is fastest
    int dims[3] = {P, P, P};
    fftw_plan fwd = fftw_plan_dft_r2c(d, dims, re.get(), spec.get(), FFTW_ESTIMATE);
    fftw_plan inv = fftw_plan_dft_c2r(d, dims, acc.get(), re.get(), FFTW_ESTIMATE);
    if (!fwd || !inv) {
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
        throw std::runtime_error("oracle field: FFT planning failed");
    }

    for (int64_t i = 0; i < spec_n; ++i) acc[i][0] = acc[i][1] = 0.0;

    const int64_t phases = int64_t(1) << ((Q - K) * d);
    const double r2max = rmax * rmax;
    std::array<double, 3> y{0.0, 0.0, 0.0};

    for (int64_t ph = 0; ph < phases; ++ph) {
        int64_t rho[3] = {0, 0, 0};
        int64_t t = ph;
        for (int ax = 0; ax < d; ++ax) {
            rho[ax] = t % s;
            t /= s;
        }

        // intensity samples on this phase's sub-lattice
        for (int64_t i = 0; i < real_n; ++i) re[i] = 0.0;
        int64_t c2 = d > 2 ? nk : 1, c1 = d > 1 ? nk : 1;
        for (int64_t z = 0; z < c2; ++z) {
            y[2] = d > 2 ? (double(s * z + rho[2]) + 0.5) * h : 0.0;
            for (int64_t yy = 0; yy < c1; ++yy) {
                y[1] = d > 1 ? (double(s * yy + rho[1]) + 0.5) * h : 0.0;
                int64_t row = (z * P + yy) * P;
                if (d == 1) row = 0;
                if (d == 2) row = yy * P;
                for (int64_t x = 0; x < nk; ++x) {
                    y[0] = (double(s * x + rho[0]) + 0.5) * h;
                    re[row + x] = cfg.intensity.density(d, y);
                }
            }
        }
        fftw_execute(fwd);
        // stash the intensity spectrum; the kernel transform reuses spec
        for (int64_t i = 0; i < spec_n; ++i) {
            mspec[i][0] = spec[i][0];
            mspec[i][1] = spec[i][1];
        }

        // tail kernel on this phase: entry w holds P(R > h * |s w - rho + off|)
        for (int64_t i = 0; i < real_n; ++i) re[i] = 0.0;
        int64_t w2 = d > 2 ? W : 0, w1 = d > 1 ? W : 0;
        for (int64_t z = -w2; z <= w2; ++z) {
            double az = d > 2 ? (double(s * z - rho[2]) + off) * h : 0.0;
            int64_t pz = ((z % P) + P) % P;
            for (int64_t yy = -w1; yy <= w1; ++yy) {
                double ay = d > 1 ? (double(s * yy - rho[1]) + off) * h : 0.0;
                double off2 = ay * ay + az * az;
                if (off2 > r2max) continue;
                int64_t py = ((yy % P) + P) % P;
                int64_t row = (pz * P + py) * P;
                if (d == 1) row = 0;
                if (d == 2) row = py * P;
                for (int64_t x = -W; x <= W; ++x) {
                    double ax0 = (double(s * x - rho[0]) + off) * h;
                    double dist2 = ax0 * ax0 + off2;
                    if (dist2 > r2max) continue;
                    double tail = cfg.radius.tail(std::sqrt(dist2));
                    if (tail == 0.0) continue;
                    int64_t px = ((x % P) + P) % P;
                    re[row + px] = tail;
                }
            }
        }
        fftw_execute(fwd);

        for (int64_t i = 0; i < spec_n; ++i) {
            double ar = mspec[i][0], ai = mspec[i][1];
            double br = spec[i][0], bi = spec[i][1];
            acc[i][0] += ar * br - ai * bi;
            acc[i][1] += ar * bi + ai * br;
        }
    }

    fftw_execute(inv);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);

    const double scale = std::pow(h, d) / std::pow(double(P), d);
    std::vector<double> out(cfg.grid.cell_count());
    int64_t c2 = d > 2 ? nk : 1, c1 = d > 1 ? nk : 1;
    for (int64_t z = 0; z < c2; ++z)
        for (int64_t yy = 0; yy < c1; ++yy) {
            int64_t row = (z * P + yy) * P;
            if (d == 1) row = 0;
            if (d == 2) row = yy * P;
            int64_t orow = (z * nk + yy) * nk;
            if (d == 1) orow = 0;
            if (d == 2) orow = yy * nk;
            for (int64_t x = 0; x < nk; ++x) {
                double v = re[row + x] * scale;
                out[orow + x] = v < 0.0 ? 0.0 : v;
            }
        }
    return out;
}

void check_against_pointwise(const BooleanConfig& cfg, int Q,
                             const std::vector<double>& field) {
    const int64_t nk = int64_t(1) << cfg.grid.level;
    const double fr[][3] = {{0.5, 0.5, 0.5},
                            {0.25, 0.25, 0.25},
                            {0.75, 0.25, 0.5},
                            {0.125, 0.625, 0.875},
                            {0.875, 0.875, 0.125}};
    for (const auto& f : fr) {
        Coords c{0, 0, 0};
        for (int ax = 0; ax < cfg.grid.d; ++ax)
            c[ax] = uint32_t(std::min<int64_t>(nk - 1, int64_t(f[ax] * double(nk))));
        uint64_t cell = cell_linear(cfg.grid, c);
        auto x = cell_center(cfg.grid, cell);
        double direct = phi(cfg, x, Q);
        double viafft = field[cell];
        if (std::abs(direct - viafft) > 1e-8 * (1.0 + std::abs(direct)))
            throw std::runtime_error(
                "oracle field: convolution disagrees with the pointwise sum");
        if (Q + 1 <= 14) {
            double finer = phi(cfg, x, Q + 1);
            if (std::abs(finer - direct) > 1e-3)
                throw std::runtime_error(
                    "oracle field: quadrature not converged at this level");
        }
    }
}

std::mutex cache_mutex;
std::map<std::string, std::shared_ptr<const std::vector<double>>> phi_cache;
std::map<std::string, std::shared_ptr<const QuantizedField>> field_cache;

} // namespace

std::shared_ptr<const std::vector<double>> phi_field(const BooleanConfig& cfg,
                                                     int quad_level) {
    cfg.validate();
    if (cfg.model == ModelKind::Stationary)
        throw std::invalid_argument(
            "phi field: stationary coverage is constant; no cube integral");
    int Q = quad_level < 0 ? cfg.grid.level + 2 : quad_level;
    if (Q < cfg.grid.level)
        throw std::invalid_argument("phi field: quadrature coarser than the grid");
    if (Q > 14) throw std::invalid_argument("phi field: quadrature level too fine");

    std::string key = fingerprint(cfg, Q);
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = phi_cache.find(key);
    if (it != phi_cache.end()) return it->second;

    auto field = std::make_shared<std::vector<double>>(compute_phi_field(cfg, Q));
    check_against_pointwise(cfg, Q, *field);
    phi_cache.emplace(key, field);
    return field;
}

std::shared_ptr<const QuantizedField> oracle_coverage_field(
    const BooleanConfig& cfg, int value_bits, int quad_level) {
    cfg.validate();
    if (value_bits < 1 || value_bits > 30)
        throw std::invalid_argument("oracle field: value bits out of range");
    int Q = quad_level < 0 ? cfg.grid.level + 2 : quad_level;

    std::string key = fingerprint(cfg, Q) + " b" + std::to_string(value_bits);
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = field_cache.find(key);
        if (it != field_cache.end()) return it->second;
    }

    auto out = std::make_shared<QuantizedField>();
    out->grid = cfg.grid;
    out->value_bits = value_bits;
    out->values.resize(cfg.grid.cell_count());
    const double denom = double(uint64_t(1) << value_bits);

    if (cfg.model == ModelKind::Stationary) {
        double c = stationary_coverage_level(cfg);
        uint32_t v = uint32_t(std::llround(c * denom));
        for (auto& cell : out->values) cell = v;
    } else {
        auto field = phi_field(cfg, Q);
        const uint64_t cells = cfg.grid.cell_count();
        const double r2 = cfg.atom_radius * cfg.atom_radius;
        for (uint64_t cidx = 0; cidx < cells; ++cidx) {
            double miss = std::exp(-(*field)[cidx]);
            if (cfg.model == ModelKind::Atoms) {
                auto x = cell_center(cfg.grid, cidx);
                for (const Atom& at : cfg.atoms) {
                    double dist2 = 0.0;
                    for (int j = 0; j < cfg.grid.d; ++j) {
                        double dj = x[j] - at.center[j];
                        dist2 += dj * dj;
                    }
                    if (dist2 <= r2) miss *= 1.0 - at.q;
                }
            }
            out->values[cidx] = uint32_t(std::llround((1.0 - miss) * denom));
        }
    }

    std::lock_guard<std::mutex> lock(cache_mutex);
    return field_cache.emplace(key, out).first->second;
}

} // namespace rset
