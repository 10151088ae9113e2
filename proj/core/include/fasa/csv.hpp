#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fasa::csv {

/// Sentinel written for absent values ("never reached", empty sample set).
inline constexpr std::string_view kAbsent = "NA";

/// RFC 4180 quoting: fields containing a comma, quote or newline are wrapped
/// in double quotes with embedded quotes doubled.
std::string field(std::string_view text);

/// Shortest decimal that round-trips to the same double. Locale independent.
std::string number(double value);
std::string number(const std::optional<double>& value);

}  // namespace fasa::csv
