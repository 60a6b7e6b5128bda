#pragma once

// Whole-grid analytic coverage fields.
//
// The pointwise quadrature in phi() costs O((2 r_max 2^Q)^d) per point and
// is hopeless over a full grid.  Written in quadrature units, though, the
// midpoint sum for every cell center at once is a discrete convolution of
// the intensity samples with a radius-tail kernel, evaluated on a stride
// lattice; splitting the quadrature lattice into stride-many phases turns
// it into that many ordinary cyclic convolutions, which FFTs handle in
// seconds.  The reorganization is exact: the FFT field agrees with phi()
// at probe cells to rounding error, and that agreement plus a
// mesh-doubling probe bounds the quadrature error.  Both checks run on
// every field build and throw on violation.
//
// Fields are cached in-process: experiment harnesses ask for the same
// oracle once per (model, grid, quadrature) across thousands of trials.

#include <memory>
#include <vector>

#include "rset/boolean_model.hpp"
#include "rset/coverage.hpp"

namespace rset {

// phi at every cell center of the base grid; throws for Stationary
std::shared_ptr<const std::vector<double>> phi_field(const BooleanConfig& cfg,
                                                     int quad_level = -1);

// quantized p at every cell center, any model kind
std::shared_ptr<const QuantizedField> oracle_coverage_field(
    const BooleanConfig& cfg, int value_bits = 20, int quad_level = -1);

} // namespace rset
