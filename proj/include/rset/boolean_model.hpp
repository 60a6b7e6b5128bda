#pragma once

// Germ-grain simulators with analytic coverage oracles.
//
// A replicate is a Poisson process of germs, a ball of random radius
// around each germ, all rasterized onto the base grid and clipped to the
// cube.  Three variants:
//
//   Stationary     constant intensity on the cube dilated by the largest
//                  possible radius, so the coverage probability is the
//                  same constant at every point of the cube;
//   NonStationary  germs confined to the cube, coverage
//                  p(x) = 1 - exp(-phi(x)) with
//                  phi(x) = integral over the cube of P(R > |x-y|) m(y) dy;
//   Atoms          a NonStationary-style base plus a fixed list of balls
//                  B(y_i, r0), each switched on independently with
//                  probability q_i; p picks up the factor
//                  prod_{i: x in B(y_i, r0)} (1 - q_i) and is
//                  discontinuous across the atom spheres.
//
// Germ windows are chosen so each formula above is exact for the process
// actually simulated, not an edge-effect approximation.

#include <array>
#include <cstdint>
#include <vector>

#include "rset/coverage.hpp"
#include "rset/grid.hpp"
#include "rset/rng.hpp"

namespace rset {

enum class RadiusKind { Dirac, Uniform };

struct RadiusLaw {
    RadiusKind kind = RadiusKind::Dirac;
    double a = 0.1; // Dirac: the radius; Uniform: lower endpoint
    double b = 0.1; // Uniform: upper endpoint

    static RadiusLaw dirac(double r0);
    static RadiusLaw uniform(double lo, double hi);

    double moment(int j) const; // E R^j
    double tail(double t) const; // P(R > t), right-continuous
    double max_radius() const;
    // true when R has a density (Uniform); Dirac concentrates mass and
    // produces coverage plateaus
    bool smooth_density() const;
    double sample(Substream& rng) const;
};

enum class IntensityKind { Constant, SeparableBump, GaussianBump };

// germ intensity m(x) >= 0 on the cube:
//   Constant       m0
//   SeparableBump  m0 + m1 * prod_j sin(pi x_j)
//   GaussianBump   m0 + amplitude * prod_j exp(-(x_j - c_j)^2 / (2 w^2))
struct IntensityModel {
    IntensityKind kind = IntensityKind::Constant;
    double m0 = 1.0;
    double m1 = 0.0;
    double amplitude = 0.0;
    std::array<double, 3> center{0.5, 0.5, 0.5};
    double width = 0.1;

    double density(int d, const std::array<double, 3>& x) const;
    // integral over [0,1]^d, closed form
    double mass(int d) const;
    // sup of the density over the cube (rejection envelope)
    double envelope(int d) const;
    // position with density m/mass on the cube: mixture inverse transform
    // for Constant and SeparableBump, envelope rejection for GaussianBump
    std::array<double, 3> sample_position(int d, Substream& rng) const;
};

enum class ModelKind { Stationary, NonStationary, Atoms };

struct Atom {
    std::array<double, 3> center{0.5, 0.5, 0.5};
    double q = 1.0; // inclusion probability
};

struct BooleanConfig {
    ModelKind model = ModelKind::NonStationary;
    IntensityModel intensity;
    RadiusLaw radius;
    std::vector<Atom> atoms; // Atoms model only
    double atom_radius = 0.0; // shared radius of the atom balls
    GridSpec grid; // base discretization
    uint64_t seed = 1;
    uint32_t n = 100; // default replicate count for runs

    // invalid_argument on violations (Stationary needs Constant intensity,
    // Atoms needs atoms, parameter ranges)
    void validate() const;

    // germ window: the cube, dilated by max_radius for Stationary
    std::array<double, 3> window_lo() const;
    std::array<double, 3> window_hi() const;
};

// one replicate; deterministic function of (cfg.seed, replicate_index),
// independent of thread count.  Draw order: germ count, then per germ the
// position followed by the radius, then one Bernoulli per atom.
Mask simulate(const BooleanConfig& cfg, uint64_t replicate_index);

std::vector<Mask> simulate_batch(const BooleanConfig& cfg, uint64_t first,
                                 uint64_t count);

// d-volume of the unit ball
double unit_ball_volume(int d);

// the constant coverage level of the stationary model:
// 1 - exp(-m0 * omega_d * E R^d)
double stationary_coverage_level(const BooleanConfig& cfg);

// phi(x) by midpoint quadrature over the cube at mesh 2^-quad_level
// (default grid level + 2), restricted to the radius support around x.
// Stationary models have no such integral over the cube; they throw.
double phi(const BooleanConfig& cfg, const std::array<double, 3>& x,
           int quad_level = -1);

// pointwise p(x) for any model kind; atom membership uses the closed ball
double analytic_coverage(const BooleanConfig& cfg,
                         const std::array<double, 3>& x, int quad_level = -1);

// pointwise oracle wrapper around analytic_coverage
CoverageOracle coverage_oracle(const BooleanConfig& cfg, int quad_level = -1);

} // namespace rset
