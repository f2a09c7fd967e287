#include "aldi/labels.hpp"

#include "aldi/csv.hpp"
#include "aldi/error.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace aldi {

std::string_view to_string(Label l) {
    switch (l) {
    case Label::NonDiscord:
        return "0";
    case Label::Discord:
        return "1";
    case Label::Unevaluable:
        return "unevaluable";
    }
    return "unevaluable";
}

std::string_view to_string(Granularity g) {
    switch (g) {
    case Granularity::SiteDay:
        return "site-day";
    case Granularity::BuildingDay:
        return "building-day";
    case Granularity::BuildingHour:
        return "building-hour";
    }
    return "site-day";
}

std::optional<Label> parse_label(std::string_view text) {
    const std::string t = csv::trim(text);
    if (t == "0") return Label::NonDiscord;
    if (t == "1") return Label::Discord;
    if (t == "unevaluable") return Label::Unevaluable;
    return std::nullopt;
}

LabelSet::LabelSet(Granularity granularity, std::string method)
    : granularity_(granularity), method_(std::move(method)) {}

void LabelSet::set(LabelKey key, LabelEntry entry) {
    const bool needs_building = granularity_ != Granularity::SiteDay;
    if (needs_building == key.building_id.empty()) {
        throw std::invalid_argument(std::string("label key does not match ") + std::string(to_string(granularity_)) +
                                    " granularity");
    }
    entries_.insert_or_assign(std::move(key), entry);
}

const LabelEntry* LabelSet::find(const LabelKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::size_t LabelSet::count(Label label) const {
    std::size_t n = 0;
    for (const auto& [key, entry] : entries_) {
        if (entry.label == label) ++n;
    }
    return n;
}

void write_labels(std::ostream& out, const LabelSet& labels) {
    const bool hourly = labels.granularity() == Granularity::BuildingHour;
    out << "site_id,building_id," << (hourly ? "timestamp" : "date") << ",label,method,d_value,p_value\n";
    for (const auto& [key, entry] : labels) {
        out << key.site_id << ',' << key.building_id << ','
            << (hourly ? format_timestamp(HourStamp{key.time}) : format_date(Date{key.time})) << ','
            << to_string(entry.label) << ',' << labels.method() << ','
            << (entry.d_value ? csv::format_double(*entry.d_value) : std::string{}) << ','
            << (entry.p_value ? csv::format_double(*entry.p_value) : std::string{}) << '\n';
    }
}

std::string labels_to_csv(const LabelSet& labels) {
    std::ostringstream out;
    write_labels(out, labels);
    return out.str();
}

namespace {

std::optional<std::size_t> column(const std::vector<std::string>& header, std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (csv::trim(header[i]) == name) return i;
    }
    return std::nullopt;
}

std::optional<double> optional_real(const std::vector<std::string>& fields, std::optional<std::size_t> col) {
    if (!col) return std::nullopt;
    auto parsed = csv::parse_reading(fields[*col]);
    return parsed ? *parsed : std::nullopt;
}

} // namespace

LabelSet read_labels(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("label file is empty");
    }
    const auto header = csv::split_line(line);
    const auto date_col = column(header, "date");
    const auto ts_col = column(header, "timestamp");
    const auto label_col = column(header, "label");
    const auto site_col = column(header, "site_id");
    const auto bld_col = column(header, "building_id");
    const auto method_col = column(header, "method");
    const auto d_col = column(header, "d_value");
    const auto p_col = column(header, "p_value");
    if (!label_col || (!date_col && !ts_col)) {
        throw DataError("label file needs a 'label' column and a 'date' or 'timestamp' column");
    }
    const bool hourly = !date_col;

    struct Row {
        LabelKey key;
        LabelEntry entry;
        std::string method;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        const auto where = "label file line " + std::to_string(line_no);
        if (fields.size() != header.size()) {
            throw DataError(where + ": wrong field count");
        }
        Row row;
        row.key.site_id = site_col ? csv::trim(fields[*site_col]) : std::string{};
        row.key.building_id = bld_col ? csv::trim(fields[*bld_col]) : std::string{};
        if (hourly) {
            const auto ts = parse_timestamp(csv::trim(fields[*ts_col]));
            if (!ts) throw DataError(where + ": bad timestamp");
            row.key.time = ts->hours;
        } else {
            const auto d = parse_date(csv::trim(fields[*date_col]));
            if (!d) throw DataError(where + ": bad date");
            row.key.time = d->days;
        }
        const auto label = parse_label(fields[*label_col]);
        if (!label) throw DataError(where + ": label must be 0, 1 or unevaluable");
        row.entry.label = *label;
        row.entry.d_value = optional_real(fields, d_col);
        row.entry.p_value = optional_real(fields, p_col);
        row.method = method_col ? csv::trim(fields[*method_col]) : std::string{};
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw DataError("label file has no rows");
    }

    Granularity g = Granularity::BuildingHour;
    if (!hourly) {
        const bool with_building = !rows.front().key.building_id.empty();
        for (const auto& r : rows) {
            if (r.key.building_id.empty() == with_building) {
                throw DataError("label file mixes site-day and building-day rows");
            }
        }
        g = with_building ? Granularity::BuildingDay : Granularity::SiteDay;
    }
    LabelSet out(g, rows.front().method.empty() ? std::string("external") : rows.front().method);
    try {
        for (auto& r : rows) {
            out.set(std::move(r.key), r.entry);
        }
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("label file: ") + e.what());
    }
    return out;
}

LabelSet read_labels(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open label file '" + path.string() + "'");
    }
    return read_labels(in);
}

} // namespace aldi
