#pragma once

#include "aldi/ingest.hpp"
#include "aldi/time.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aldi::mp {

/// Z-normalized Euclidean distance between two equal-length windows.
/// Constant windows normalize to the zero vector. Throws
/// std::invalid_argument on length mismatch or length < 2.
[[nodiscard]] double znorm_distance(std::span<const double> a, std::span<const double> b);

struct MatrixProfileResult {
    std::size_t window = 0;
    std::size_t exclusion = 0;
    /// Nearest-neighbour distance per window start; +inf where invalid.
    std::vector<double> distances;
    /// Partner window of the nearest neighbour; -1 where invalid.
    std::vector<std::int64_t> neighbor_index;
    /// False where the window covers a missing reading or has no admissible partner.
    std::vector<std::uint8_t> valid;

    [[nodiscard]] std::size_t size() const { return distances.size(); }
    [[nodiscard]] bool is_valid(std::size_t i) const { return valid[i] != 0; }
};

[[nodiscard]] constexpr std::size_t default_exclusion(std::size_t window) { return (window + 1) / 2; }

/// Self-join matrix profile over `values` (NaN marks a missing reading).
/// Candidate partners j satisfy |i - j| > exclusion. Ties resolve to the
/// smallest j. Throws std::invalid_argument when the series is shorter than
/// 2 * window, window < 2, or no window is valid.
[[nodiscard]] MatrixProfileResult self_join(std::span<const double> values, std::size_t window,
                                            std::optional<std::size_t> exclusion = std::nullopt);

[[nodiscard]] MatrixProfileResult self_join(const ingest::MeterSeries& series, std::size_t window = 24,
                                            std::optional<std::size_t> exclusion = std::nullopt);

enum class Aggregation { DayStart, DayMean };

[[nodiscard]] std::string_view to_string(Aggregation a);
[[nodiscard]] std::optional<Aggregation> parse_aggregation(std::string_view text);

struct DailyValue {
    Date date;
    Weekday weekday = Weekday::Monday;
    std::optional<double> value; ///< nullopt = unevaluable
};

/// One matrix-profile value per calendar day of `series`. Days holding a
/// missing reading are unevaluable. Throws std::invalid_argument unless the
/// profile was computed with a 24-hour window over a series of the same length.
[[nodiscard]] std::vector<DailyValue> daily_mp(const MatrixProfileResult& profile, const ingest::MeterSeries& series,
                                               Aggregation aggregation = Aggregation::DayStart);

struct BuildingDaily {
    std::string site_id;
    std::string building_id;
    std::vector<DailyValue> days;
};

/// Pooled daily values for one (site, date). `building_id` is empty for
/// site-level pooling and names the building in per-building mode.
struct DailyMPSample {
    std::string site_id;
    std::string building_id;
    Date date;
    Weekday weekday = Weekday::Monday;
    std::vector<double> values;
};

/// Pools every building's daily values per (site, date), skipping
/// unevaluable days. Output ordered by (site, date); empty samples are kept.
[[nodiscard]] std::vector<DailyMPSample> collect_site_samples(std::span<const BuildingDaily> buildings);

/// Same shape as collect_site_samples but keyed per building, so each
/// building is compared only with its own history.
[[nodiscard]] std::vector<DailyMPSample> collect_building_samples(std::span<const BuildingDaily> buildings);

/// CSV dump: index,distance,neighbor_index,valid
void write_profile_csv(std::ostream& out, const MatrixProfileResult& profile);

} // namespace aldi::mp
