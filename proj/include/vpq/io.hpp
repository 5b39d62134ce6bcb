#pragma once

/// \file io.hpp
/// Little-endian binary matrix files and deterministic text formatting.
///
/// Flat matrix file layout (shared by latent dumps and codebooks):
///   4 magic bytes | dim as u32 LE | count as u64 LE | count*dim f64 LE,
/// row-major. Latent dumps use magic "VPQ1", codebooks "VPC1".

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpq/types.hpp"

namespace vpq {

inline constexpr std::array<char, 4> kLatentDumpMagic = {'V', 'P', 'Q', '1'};
inline constexpr std::array<char, 4> kCodebookMagic = {'V', 'P', 'C', '1'};

namespace detail {

inline void write_u32_le(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

inline void write_u64_le(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline void write_f64_le(std::ostream& os, double x) {
    write_u64_le(os, std::bit_cast<std::uint64_t>(x));
}

inline std::uint32_t read_u32_le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("unexpected end of file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t read_u64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("unexpected end of file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double read_f64_le(std::istream& is) { return std::bit_cast<double>(read_u64_le(is)); }

}  // namespace detail

inline void write_matrix(std::ostream& os, std::array<char, 4> magic, std::uint32_t dim,
                         std::span<const double> flat) {
    os.write(magic.data(), 4);
    detail::write_u32_le(os, dim);
    detail::write_u64_le(os, static_cast<std::uint64_t>(flat.size() / dim));
    for (double x : flat) detail::write_f64_le(os, x);
    if (!os) throw std::runtime_error("write failed");
}

struct MatrixData {
    std::uint32_t dim = 0;
    std::vector<double> flat;  // count * dim values, row-major
};

inline MatrixData read_matrix(std::istream& is, std::array<char, 4> expected_magic) {
    std::array<char, 4> magic{};
    is.read(magic.data(), 4);
    if (!is || magic != expected_magic) throw std::runtime_error("bad magic bytes");
    MatrixData out;
    out.dim = detail::read_u32_le(is);
    const std::uint64_t count = detail::read_u64_le(is);
    if (out.dim == 0) throw std::runtime_error("dim must be nonzero");
    out.flat.resize(static_cast<std::size_t>(count) * out.dim);
    for (auto& x : out.flat) x = detail::read_f64_le(is);
    return out;
}

inline void write_matrix_file(const std::string& path, std::array<char, 4> magic,
                              std::uint32_t dim, std::span<const double> flat) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_matrix(os, magic, dim, flat);
}

inline MatrixData read_matrix_file(const std::string& path, std::array<char, 4> magic) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_matrix(is, magic);
}

inline void write_latent_dump(const std::string& path, const SampleSet& samples) {
    write_matrix_file(path, kLatentDumpMagic, static_cast<std::uint32_t>(samples.dim()),
                      samples.flat());
}

inline SampleSet read_latent_dump(const std::string& path) {
    MatrixData m = read_matrix_file(path, kLatentDumpMagic);
    return SampleSet(std::move(m.flat), m.dim);
}

/// Shortest round-trip decimal representation; byte-stable across runs.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

}  // namespace vpq
