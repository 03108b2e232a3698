#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small parsing and formatting helpers shared by the text file formats.
namespace ictus {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Whole-string numeric parses; `what` names the field in the error message.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);
std::size_t parse_size(std::string_view s, std::string_view what);
bool parse_bool(std::string_view s, std::string_view what);

// 17 significant digits: enough to round-trip any double.
std::string format_g17(double v);
std::string format_fixed(double v, int decimals);

// FNV-1a, 64-bit. Stable across platforms, used for config provenance stamps.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(std::string_view s);

}  // namespace ictus
