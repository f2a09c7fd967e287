#include "aldi/time.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace aldi {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

template <typename T>
bool parse_fixed(std::string_view text, std::size_t pos, std::size_t len, T& out) {
    if (pos + len > text.size()) {
        return false;
    }
    const char* first = text.data() + pos;
    const char* last = first + len;
    for (const char* p = first; p != last; ++p) {
        if (*p < '0' || *p > '9') {
            return false;
        }
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::optional<Date> parse_ymd(std::string_view text) {
    int year = 0;
    unsigned month = 0;
    unsigned day = 0;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    if (!parse_fixed(text, 0, 4, year) || !parse_fixed(text, 5, 2, month) || !parse_fixed(text, 8, 2, day)) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return Date{std::chrono::sys_days{ymd}.time_since_epoch().count()};
}

} // namespace

Date HourStamp::date() const { return Date{floor_div(hours, 24)}; }

int HourStamp::hour_of_day() const { return static_cast<int>(hours - floor_div(hours, 24) * 24); }

Weekday weekday_of(Date d) {
    // 1970-01-01 was a Thursday.
    const std::int64_t w = (d.days % 7 + 7 + 3) % 7;
    return static_cast<Weekday>(w);
}

std::string_view weekday_name(Weekday w) {
    static constexpr std::array<std::string_view, 7> names{"Monday", "Tuesday",  "Wednesday", "Thursday",
                                                           "Friday", "Saturday", "Sunday"};
    return names[static_cast<std::size_t>(w)];
}

HourStamp start_of(Date d) { return HourStamp{d.days * 24}; }

Date make_date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    return Date{std::chrono::sys_days{ymd}.time_since_epoch().count()};
}

std::optional<HourStamp> parse_timestamp(std::string_view text) {
    auto date = parse_ymd(text);
    if (!date || text.size() != 19 || (text[10] != ' ' && text[10] != 'T') || text[13] != ':' ||
        text[16] != ':') {
        return std::nullopt;
    }
    int hour = 0;
    int minute = 0;
    int second = 0;
    if (!parse_fixed(text, 11, 2, hour) || !parse_fixed(text, 14, 2, minute) ||
        !parse_fixed(text, 17, 2, second)) {
        return std::nullopt;
    }
    if (hour > 23 || minute != 0 || second != 0) {
        return std::nullopt;
    }
    return HourStamp{date->days * 24 + hour};
}

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10) {
        return std::nullopt;
    }
    return parse_ymd(text);
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{d.days}}};
    std::array<char, 16> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return std::string{buf.data()};
}

std::string format_timestamp(HourStamp t) {
    std::array<char, 8> buf{};
    std::snprintf(buf.data(), buf.size(), " %02d", t.hour_of_day());
    return format_date(t.date()) + buf.data() + ":00:00";
}

} // namespace aldi
