#include "aldi/ingest.hpp"

#include "aldi/csv.hpp"
#include "aldi/error.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace aldi::ingest {

namespace {

constexpr std::size_t kMaxExamples = 5;

std::optional<std::size_t> find_column(const std::vector<std::string>& header, std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (csv::trim(header[i]) == name) {
            return i;
        }
    }
    return std::nullopt;
}

void note_malformed(ParseReport& report, std::size_t line_no, std::string_view reason) {
    ++report.malformed_rows;
    if (report.malformed_examples.size() < kMaxExamples) {
        report.malformed_examples.push_back("line " + std::to_string(line_no) + ": " + std::string(reason));
    }
}

} // namespace

std::string SiteMap::resolve(std::string_view building, std::string_view from_column) const {
    if (auto it = building_to_site.find(building); it != building_to_site.end()) {
        return it->second;
    }
    if (!from_column.empty()) {
        return std::string(from_column);
    }
    return default_site;
}

ParseReport parse_csv(const std::filesystem::path& path, const ColumnMap& columns, const SiteMap& sites) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open meter file '" + path.string() + "'");
    }
    return parse_csv(in, columns, sites);
}

ParseReport parse_csv(std::istream& in, const ColumnMap& columns, const SiteMap& sites) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("meter file is empty (no header row)");
    }
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
        line.erase(0, 3); // UTF-8 BOM
    }
    const auto header = csv::split_line(line);
    const auto ts_col = find_column(header, columns.timestamp);
    const auto bld_col = find_column(header, columns.building);
    const auto val_col = find_column(header, columns.reading);
    const auto site_col = find_column(header, columns.site);

    std::string missing_cols;
    if (!ts_col) missing_cols += " '" + columns.timestamp + "'";
    if (!bld_col) missing_cols += " '" + columns.building + "'";
    if (!val_col) missing_cols += " '" + columns.reading + "'";
    if (!missing_cols.empty()) {
        throw DataError("meter file header lacks mandatory column(s):" + missing_cols);
    }

    ParseReport report;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) {
            continue;
        }
        const auto fields = csv::split_line(line);
        if (fields.size() != header.size()) {
            note_malformed(report, line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                                std::to_string(fields.size()));
            continue;
        }
        const auto ts = parse_timestamp(csv::trim(fields[*ts_col]));
        if (!ts) {
            note_malformed(report, line_no, "bad timestamp '" + fields[*ts_col] + "'");
            continue;
        }
        std::string building = csv::trim(fields[*bld_col]);
        if (building.empty()) {
            note_malformed(report, line_no, "empty building id");
            continue;
        }
        const auto reading = csv::parse_reading(fields[*val_col]);
        if (!reading) {
            note_malformed(report, line_no, "bad reading '" + fields[*val_col] + "'");
            continue;
        }
        if (reading->has_value() && (!std::isfinite(**reading) || **reading < 0.0)) {
            note_malformed(report, line_no, "reading must be finite and non-negative");
            continue;
        }
        std::string site = sites.resolve(building, site_col ? csv::trim(fields[*site_col]) : std::string{});
        report.records.push_back(MeterRecord{*ts, std::move(building), std::move(site), *reading});
    }
    if (report.records.empty()) {
        throw DataError("no parseable rows in meter file (" + std::to_string(report.malformed_rows) +
                        " malformed)");
    }
    return report;
}

AlignReport align(std::span<const MeterRecord> records, std::string_view site_id) {
    std::optional<HourStamp> first;
    std::optional<HourStamp> last;
    for (const auto& r : records) {
        if (r.site_id != site_id) {
            continue;
        }
        if (!first || r.timestamp < *first) first = r.timestamp;
        if (!last || r.timestamp > *last) last = r.timestamp;
    }
    if (!first) {
        throw std::invalid_argument("no records for site '" + std::string(site_id) + "'");
    }

    Date first_day = first->date();
    if (first->hour_of_day() != 0) {
        ++first_day.days;
    }
    Date last_day = last->date();
    if (last->hour_of_day() != 23) {
        --last_day.days;
    }
    if (last_day < first_day) {
        throw std::invalid_argument("site '" + std::string(site_id) + "' does not cover one whole day");
    }

    AlignReport report;
    Portfolio& p = report.portfolio;
    p.site_id = std::string(site_id);
    p.start = start_of(first_day);
    p.hours = static_cast<std::size_t>(last_day.days - first_day.days + 1) * 24;

    std::set<std::string> buildings;
    for (const auto& r : records) {
        if (r.site_id == site_id) {
            buildings.insert(r.building_id);
        }
    }
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& b : buildings) {
        slot.emplace(b, p.series.size());
        p.series.push_back(MeterSeries{b, p.site_id, p.start, std::vector<double>(p.hours, kMissing)});
    }

    std::vector<std::vector<bool>> seen(p.series.size(), std::vector<bool>(p.hours, false));
    for (const auto& r : records) {
        if (r.site_id != site_id) {
            continue;
        }
        const std::int64_t offset = r.timestamp.hours - p.start.hours;
        if (offset < 0 || offset >= static_cast<std::int64_t>(p.hours)) {
            ++report.outside_whole_days;
            continue;
        }
        const std::size_t b = slot.at(r.building_id);
        const auto i = static_cast<std::size_t>(offset);
        if (seen[b][i]) {
            ++report.duplicates;
        }
        seen[b][i] = true;
        p.series[b].values[i] = r.reading.value_or(kMissing);
    }
    return report;
}

std::vector<AlignReport> align_sites(std::span<const MeterRecord> records) {
    std::set<std::string> sites;
    for (const auto& r : records) {
        sites.insert(r.site_id);
    }
    std::vector<AlignReport> out;
    out.reserve(sites.size());
    for (const auto& s : sites) {
        out.push_back(align(records, s));
    }
    return out;
}

MeterSeries impute_short_gaps(const MeterSeries& series, std::size_t max_gap) {
    MeterSeries out = series;
    auto& v = out.values;
    const std::size_t n = v.size();
    std::size_t i = 0;
    while (i < n) {
        if (!is_missing(v[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && is_missing(v[j])) {
            ++j;
        }
        const std::size_t run = j - i;
        if (i > 0 && j < n && run <= max_gap) {
            const double left = v[i - 1];
            const double right = v[j];
            const double step = (right - left) / static_cast<double>(run + 1);
            for (std::size_t k = 0; k < run; ++k) {
                v[i + k] = left + step * static_cast<double>(k + 1);
            }
        }
        i = j;
    }
    return out;
}

Portfolio impute_short_gaps(const Portfolio& portfolio, std::size_t max_gap) {
    Portfolio out = portfolio;
    for (auto& s : out.series) {
        s = impute_short_gaps(s, max_gap);
    }
    return out;
}

std::vector<bool> unevaluable_days(const MeterSeries& series) {
    std::vector<bool> flags(series.day_count(), false);
    for (std::size_t i = 0; i < flags.size() * 24; ++i) {
        if (series.missing(i)) {
            flags[i / 24] = true;
        }
    }
    return flags;
}

void write_csv(std::ostream& out, std::span<const Portfolio> portfolios, const ColumnMap& columns) {
    out << columns.timestamp << ',' << columns.site << ',' << columns.building << ',' << columns.reading << '\n';
    for (const auto& p : portfolios) {
        for (const auto& s : p.series) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                out << format_timestamp(s.time_at(i)) << ',' << s.site_id << ',' << s.building_id << ','
                    << csv::format_double(s.values[i]) << '\n';
            }
        }
    }
}

} // namespace aldi::ingest
