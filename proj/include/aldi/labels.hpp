#pragma once

#include "aldi/time.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace aldi {

enum class Label : std::uint8_t { NonDiscord = 0, Discord = 1, Unevaluable = 2 };

enum class Granularity : std::uint8_t { SiteDay, BuildingDay, BuildingHour };

[[nodiscard]] std::string_view to_string(Label l);
[[nodiscard]] std::string_view to_string(Granularity g);
[[nodiscard]] std::optional<Label> parse_label(std::string_view text);

namespace method {
inline constexpr std::string_view kAldiPlusPlus = "aldi++";
inline constexpr std::string_view kAldi = "aldi";
inline constexpr std::string_view kTwoSd = "2sd";
inline constexpr std::string_view kGroundTruth = "ground-truth";
} // namespace method

/// `time` is a day number (Date::days) for daily granularities and an hour
/// number (HourStamp::hours) for hourly ones. `building_id` is empty for
/// site-day keys.
struct LabelKey {
    std::string site_id;
    std::string building_id;
    std::int64_t time = 0;

    auto operator<=>(const LabelKey&) const = default;
    bool operator==(const LabelKey&) const = default;
};

struct LabelEntry {
    Label label = Label::Unevaluable;
    std::optional<double> d_value;
    std::optional<double> p_value;
};

class LabelSet {
public:
    using Map = std::map<LabelKey, LabelEntry>;

    LabelSet() = default;
    LabelSet(Granularity granularity, std::string method);

    [[nodiscard]] Granularity granularity() const { return granularity_; }
    [[nodiscard]] const std::string& method() const { return method_; }
    void set_method(std::string method) { method_ = std::move(method); }

    /// Inserts or overwrites. Throws std::invalid_argument if the key shape does
    /// not fit the granularity (site-day keys carry no building, the others do).
    void set(LabelKey key, LabelEntry entry);
    void set(LabelKey key, Label label) { set(std::move(key), LabelEntry{label, {}, {}}); }

    [[nodiscard]] const LabelEntry* find(const LabelKey& key) const;
    [[nodiscard]] const Map& entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] bool empty() const { return entries_.empty(); }
    [[nodiscard]] std::size_t count(Label label) const;

    [[nodiscard]] auto begin() const { return entries_.begin(); }
    [[nodiscard]] auto end() const { return entries_.end(); }

private:
    Granularity granularity_ = Granularity::SiteDay;
    std::string method_;
    Map entries_;
};

/// Label file: site_id,building_id,{date|timestamp},label,method,d_value,p_value
/// with label in {0, 1, unevaluable}; rows sorted by (site, building, time).
void write_labels(std::ostream& out, const LabelSet& labels);
[[nodiscard]] std::string labels_to_csv(const LabelSet& labels);

/// Reads a label file. Only the time column (`date` or `timestamp`) and
/// `label` are mandatory; `site_id`, `building_id`, `method`, `d_value` and
/// `p_value` are optional. Granularity follows from the time column and whether
/// building ids are present. Throws IoError / DataError.
[[nodiscard]] LabelSet read_labels(std::istream& in);
[[nodiscard]] LabelSet read_labels(const std::filesystem::path& path);

} // namespace aldi
