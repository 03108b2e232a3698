#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "ictus/error.hpp"

// Little-endian primitives shared by the binary file formats.
namespace ictus::detail {

template <class UInt>
void write_le(std::ostream& out, UInt value) {
    char bytes[sizeof(UInt)];
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    }
    out.write(bytes, sizeof(UInt));
}

template <class UInt>
UInt read_le(std::istream& in) {
    unsigned char bytes[sizeof(UInt)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(UInt));
    if (!in) throw ValidationError("truncated binary file");
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        value |= static_cast<UInt>(bytes[i]) << (8 * i);
    }
    return value;
}

inline void write_f64(std::ostream& out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v)); }
inline double read_f64(std::istream& in) { return std::bit_cast<double>(read_le<std::uint64_t>(in)); }

inline void write_string(std::ostream& out, const std::string& s) {
    write_le(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, std::size_t max_len = 1 << 20) {
    const auto len = read_le<std::uint32_t>(in);
    if (len > max_len) throw ValidationError("string field too long in binary file");
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw ValidationError("truncated binary file");
    return s;
}

inline void expect_magic(std::istream& in, const char* magic, std::size_t n, const std::string& what) {
    std::string got(n, '\0');
    in.read(got.data(), static_cast<std::streamsize>(n));
    if (!in || got != std::string(magic, n)) throw ValidationError("not a " + what + " file (bad magic)");
}

}  // namespace ictus::detail
