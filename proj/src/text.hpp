#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cosmo_rul::text {

// Splits on ASCII spaces, tabs and carriage returns.
std::vector<std::string_view> split_ws(std::string_view line);
std::string_view trim(std::string_view s);

// Locale-independent; the whole token must be consumed.
std::optional<double> to_double(std::string_view token);
std::optional<long long> to_int(std::string_view token);
std::optional<std::uint64_t> to_uint64(std::string_view token);

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

}  // namespace cosmo_rul::text
