#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aldi::csv {

/// Splits one CSV line. Double-quoted fields may contain commas; `""` inside
/// quotes is an escaped quote. A trailing '\r' is ignored.
[[nodiscard]] std::vector<std::string> split_line(std::string_view line);

/// Shortest representation that round-trips to the same double.
[[nodiscard]] std::string format_double(double value);

/// Parses a real value. Empty, `NaN`, `nan`, `NA` and `null` parse as missing
/// (returns an engaged optional holding nullopt). Garbage returns nullopt.
[[nodiscard]] std::optional<std::optional<double>> parse_reading(std::string_view text);

[[nodiscard]] std::string trim(std::string_view text);

/// Writes `contents` to `path` via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

} // namespace aldi::csv
