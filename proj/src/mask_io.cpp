#include "rset/mask_io.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace rset {

namespace {

constexpr uint8_t kVersion = 0x01;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

void write_bytes(std::FILE* f, const void* p, size_t len, const std::string& path) {
    if (std::fwrite(p, 1, len, f) != len)
        throw std::runtime_error("short write to " + path);
}

void read_bytes(std::FILE* f, void* p, size_t len, const std::string& path) {
    if (std::fread(p, 1, len, f) != len)
        throw std::runtime_error(path + ": truncated file");
}

void write_header(std::FILE* f, const char magic[4], const GridSpec& g,
                  const std::string& path) {
    uint8_t hdr[7] = {uint8_t(magic[0]), uint8_t(magic[1]), uint8_t(magic[2]),
                      uint8_t(magic[3]), kVersion, uint8_t(g.d), uint8_t(g.level)};
    write_bytes(f, hdr, sizeof hdr, path);
}

GridSpec read_header(std::FILE* f, const char magic[4], const std::string& path) {
    uint8_t hdr[7];
    read_bytes(f, hdr, sizeof hdr, path);
    for (int i = 0; i < 4; ++i)
        if (hdr[i] != uint8_t(magic[i]))
            throw std::runtime_error(path + ": bad magic (expected " +
                                     std::string(magic, 4) + ")");
    if (hdr[4] != kVersion)
        throw std::runtime_error(path + ": unsupported format version " +
                                 std::to_string(int(hdr[4])));
    int d = hdr[5], k = hdr[6];
    if (d < 1 || d > 3)
        throw std::runtime_error(path + ": invalid dimension " + std::to_string(d));
    if (k * d > 40)
        throw std::runtime_error(path + ": grid too fine (level " +
                                 std::to_string(k) + ")");
    return GridSpec(d, k);
}

void expect_eof(std::FILE* f, const std::string& path) {
    uint8_t b;
    if (std::fread(&b, 1, 1, f) != 0)
        throw std::runtime_error(path + ": trailing bytes after payload");
}

void put_u32(std::FILE* f, uint32_t v, const std::string& path) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    write_bytes(f, b, 4, path);
}

uint32_t get_u32(std::FILE* f, const std::string& path) {
    uint8_t b[4];
    read_bytes(f, b, 4, path);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
           uint32_t(b[3]) << 24;
}

} // namespace

void write_vrbm(const Mask& m, const std::string& path) {
    FilePtr f = open_or_throw(path, "wb");
    write_header(f.get(), "VRBM", m.grid(), path);
    uint64_t cells = m.grid().cell_count();
    uint64_t bytes = (cells + 7) / 8;
    std::vector<uint8_t> buf(bytes, 0);
    for (uint64_t i = 0; i < cells; ++i)
        if (m.test(i)) buf[i >> 3] |= uint8_t(1u << (i & 7));
    write_bytes(f.get(), buf.data(), buf.size(), path);
}

Mask read_vrbm(const std::string& path) {
    FilePtr f = open_or_throw(path, "rb");
    GridSpec g = read_header(f.get(), "VRBM", path);
    Mask m(g);
    uint64_t cells = g.cell_count();
    uint64_t bytes = (cells + 7) / 8;
    std::vector<uint8_t> buf(bytes);
    read_bytes(f.get(), buf.data(), bytes, path);
    for (uint64_t i = 0; i < cells; ++i)
        if ((buf[i >> 3] >> (i & 7)) & 1u) m.set(i);
    expect_eof(f.get(), path);
    return m;
}

void write_vrbw(const WeightedMask& w, const std::string& path) {
    FilePtr f = open_or_throw(path, "wb");
    write_header(f.get(), "VRBW", w.grid(), path);
    constexpr double kDen = 4294967295.0; // 2^32 - 1
    uint64_t cells = w.grid().cell_count();
    auto frac_it = w.fractional().begin();
    for (uint64_t i = 0; i < cells; ++i) {
        uint32_t v = 0;
        if (w.ones().test(i)) {
            v = 0xFFFFFFFFu;
        } else if (frac_it != w.fractional().end() && frac_it->first == i) {
            double x = frac_it->second.to_double();
            v = uint32_t(std::llround(x * kDen));
            ++frac_it;
        }
        put_u32(f.get(), v, path);
    }
}

WeightedMask read_vrbw(const std::string& path) {
    FilePtr f = open_or_throw(path, "rb");
    GridSpec g = read_header(f.get(), "VRBW", path);
    WeightedMask w(g);
    uint64_t cells = g.cell_count();
    for (uint64_t i = 0; i < cells; ++i) {
        uint32_t v = get_u32(f.get(), path);
        if (v == 0xFFFFFFFFu) w.set_one(i);
        else if (v != 0)
            w.set_weight(i, Rational(int128(v), int128(0xFFFFFFFFu)));
    }
    w.normalize_fractional();
    expect_eof(f.get(), path);
    return w;
}

void write_vrbc(const CoverageField& fld, const std::string& path) {
    FilePtr f = open_or_throw(path, "wb");
    write_header(f.get(), "VRBC", fld.grid, path);
    put_u32(f.get(), fld.n, path);
    for (uint32_t c : fld.counts) put_u32(f.get(), c, path);
}

CoverageField read_vrbc(const std::string& path) {
    FilePtr f = open_or_throw(path, "rb");
    GridSpec g = read_header(f.get(), "VRBC", path);
    CoverageField fld(g);
    fld.n = get_u32(f.get(), path);
    for (auto& c : fld.counts) {
        c = get_u32(f.get(), path);
        if (c > fld.n)
            throw std::runtime_error(path + ": cell count exceeds replicate count");
    }
    expect_eof(f.get(), path);
    return fld;
}

} // namespace rset
