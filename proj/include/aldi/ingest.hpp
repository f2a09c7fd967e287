#pragma once

#include "aldi/time.hpp"

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aldi::ingest {

/// Column names of the long-format meter CSV. Defaults follow BDG2.
struct ColumnMap {
    std::string timestamp = "timestamp";
    std::string building = "building_id";
    std::string reading = "meter_reading";
    /// Optional; when absent from the header every row uses SiteMap::default_site.
    std::string site = "site_id";
};

/// Building to site grouping. Explicit entries win over the CSV site column,
/// which wins over `default_site`.
struct SiteMap {
    std::string default_site = "site";
    std::map<std::string, std::string, std::less<>> building_to_site;

    [[nodiscard]] std::string resolve(std::string_view building, std::string_view from_column) const;
};

struct MeterRecord {
    HourStamp timestamp;
    std::string building_id;
    std::string site_id;
    std::optional<double> reading; ///< nullopt when the reading is missing.
};

struct ParseReport {
    std::vector<MeterRecord> records;
    std::size_t malformed_rows = 0;
    /// Up to a handful of "line N: reason" strings for diagnostics.
    std::vector<std::string> malformed_examples;
};

/// Reads long-format meter data. Throws IoError if the file cannot be read and
/// DataError on missing mandatory columns or when no row parses.
[[nodiscard]] ParseReport parse_csv(const std::filesystem::path& path, const ColumnMap& columns = {},
                                    const SiteMap& sites = {});
[[nodiscard]] ParseReport parse_csv(std::istream& in, const ColumnMap& columns = {}, const SiteMap& sites = {});

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

[[nodiscard]] inline bool is_missing(double v) { return std::isnan(v); }

/// One building's hourly readings; index i is `start + i` hours. Missing
/// readings are stored as NaN.
struct MeterSeries {
    std::string building_id;
    std::string site_id;
    HourStamp start;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] std::size_t day_count() const { return values.size() / 24; }
    [[nodiscard]] bool missing(std::size_t i) const { return is_missing(values[i]); }
    [[nodiscard]] HourStamp time_at(std::size_t i) const { return start + static_cast<std::int64_t>(i); }
    [[nodiscard]] Weekday weekday_at(std::size_t i) const { return weekday_of(time_at(i).date()); }
    [[nodiscard]] Date day(std::size_t d) const { return Date{start.date().days + static_cast<std::int64_t>(d)}; }
};

/// Buildings of one site sharing an identical calendar span.
struct Portfolio {
    std::string site_id;
    HourStamp start;
    std::size_t hours = 0;
    std::vector<MeterSeries> series; ///< sorted by building_id

    [[nodiscard]] std::size_t day_count() const { return hours / 24; }
};

struct AlignReport {
    Portfolio portfolio;
    std::size_t duplicates = 0;       ///< (building, hour) pairs seen more than once
    std::size_t outside_whole_days = 0; ///< records trimmed off partial leading/trailing days
};

/// Builds the site's portfolio from the records tagged with `site_id`. The
/// span runs from the first midnight at or after the earliest record to the
/// last 23:00 at or before the latest one; duplicates resolve last-write-wins.
/// Throws std::invalid_argument when no record belongs to the site or no whole
/// day is covered.
[[nodiscard]] AlignReport align(std::span<const MeterRecord> records, std::string_view site_id);

/// Aligns every site present in `records`, ordered by site id.
[[nodiscard]] std::vector<AlignReport> align_sites(std::span<const MeterRecord> records);

/// Linearly interpolates interior runs of at most `max_gap` missing hours.
[[nodiscard]] MeterSeries impute_short_gaps(const MeterSeries& series, std::size_t max_gap = 3);

[[nodiscard]] Portfolio impute_short_gaps(const Portfolio& portfolio, std::size_t max_gap = 3);

/// Per day, true when any hour of that day is still missing.
[[nodiscard]] std::vector<bool> unevaluable_days(const MeterSeries& series);

/// Writes portfolios back as long-format CSV (missing readings as `NaN`).
void write_csv(std::ostream& out, std::span<const Portfolio> portfolios, const ColumnMap& columns = {});

} // namespace aldi::ingest
