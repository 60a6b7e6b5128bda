#pragma once

// On-disk formats for masks, weighted masks and coverage fields.
//
// Shared 7-byte header: 4 magic bytes naming the payload ("VRBM", "VRBW",
// "VRBC"), a format version byte (0x01), the dimension d and the grid
// level k.  Payloads:
//   VRBM  ceil(2^(k*d)/8) bytes, bit i (LSB-first within each byte) is the
//         indicator of cell linear index i
//   VRBW  2^(k*d) little-endian uint32 fixed-point weights with
//         denominator 2^32 - 1
//   VRBC  little-endian uint32 replicate count n, then 2^(k*d)
//         little-endian uint32 per-cell hit counts
// Readers validate magic, version, d, k and exact payload length.

#include <string>

#include "rset/coverage.hpp"
#include "rset/grid.hpp"
#include "rset/weighted.hpp"

namespace rset {

void write_vrbm(const Mask& m, const std::string& path);
Mask read_vrbm(const std::string& path);

void write_vrbw(const WeightedMask& w, const std::string& path);
WeightedMask read_vrbw(const std::string& path);

void write_vrbc(const CoverageField& f, const std::string& path);
CoverageField read_vrbc(const std::string& path);

} // namespace rset
