#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace aldi {

/// Calendar date as days since 1970-01-01 (naive local time, no DST).
struct Date {
    std::int64_t days = 0;

    auto operator<=>(const Date&) const = default;
};

/// Hour-resolution naive timestamp as hours since 1970-01-01T00.
struct HourStamp {
    std::int64_t hours = 0;

    auto operator<=>(const HourStamp&) const = default;

    [[nodiscard]] Date date() const;
    [[nodiscard]] int hour_of_day() const;
    [[nodiscard]] HourStamp operator+(std::int64_t h) const { return HourStamp{hours + h}; }
};

enum class Weekday : std::uint8_t { Monday = 0, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday };

[[nodiscard]] Weekday weekday_of(Date d);
[[nodiscard]] std::string_view weekday_name(Weekday w);

[[nodiscard]] HourStamp start_of(Date d);
[[nodiscard]] Date make_date(int year, unsigned month, unsigned day);

/// Parses `YYYY-MM-DD HH:MM:SS` (also accepts a `T` separator). Minutes and
/// seconds must be zero; anything else returns nullopt.
[[nodiscard]] std::optional<HourStamp> parse_timestamp(std::string_view text);
/// Parses `YYYY-MM-DD`.
[[nodiscard]] std::optional<Date> parse_date(std::string_view text);

[[nodiscard]] std::string format_timestamp(HourStamp t);
[[nodiscard]] std::string format_date(Date d);

} // namespace aldi
