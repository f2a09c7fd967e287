#include "aldi/matrix_profile.hpp"

#include "aldi/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace aldi::mp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Rolling cross products are recomputed from scratch this often along a diagonal.
constexpr std::size_t kRefreshInterval = 4096;
// Below this squared distance the dot-product route loses too many digits and
// the pair is re-evaluated on explicit z-scores.
constexpr double kRefineBelow = 1e-8;

struct WindowStats {
    double mean = 0.0;
    double inv_sd = 0.0; ///< 1 / population sd; 0 for constant windows
};

WindowStats window_stats(std::span<const double> w) {
    const auto m = static_cast<double>(w.size());
    double sum = 0.0;
    double lo = w[0];
    double hi = w[0];
    for (double v : w) {
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double mean = sum / m;
    if (lo == hi) {
        return {mean, 0.0};
    }
    double ssd = 0.0;
    for (double v : w) {
        ssd += (v - mean) * (v - mean);
    }
    return {mean, ssd > 0.0 ? std::sqrt(m / ssd) : 0.0};
}

double explicit_sq_distance(std::span<const double> a, const WindowStats& sa, std::span<const double> b,
                            const WindowStats& sb) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double za = (a[k] - sa.mean) * sa.inv_sd;
        const double zb = (b[k] - sb.mean) * sb.inv_sd;
        acc += (za - zb) * (za - zb);
    }
    return acc;
}

} // namespace

double znorm_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("znorm_distance: length mismatch");
    }
    if (a.size() < 2) {
        throw std::invalid_argument("znorm_distance: windows need at least 2 points");
    }
    return std::sqrt(explicit_sq_distance(a, window_stats(a), b, window_stats(b)));
}

MatrixProfileResult self_join(std::span<const double> values, std::size_t window,
                              std::optional<std::size_t> exclusion) {
    const std::size_t n = values.size();
    const std::size_t m = window;
    if (m < 2) {
        throw std::invalid_argument("self_join: window must be at least 2");
    }
    if (n < 2 * m) {
        throw std::invalid_argument("self_join: series of length " + std::to_string(n) +
                                    " is shorter than twice the window (" + std::to_string(m) + ")");
    }
    const std::size_t ez = exclusion.value_or(default_exclusion(m));
    const std::size_t len = n - m + 1;

    // Centre on the mean of the present readings; missing slots become 0 so the
    // rolling recurrences stay finite. Windows touching them are masked below.
    double centre = 0.0;
    std::size_t present = 0;
    for (double v : values) {
        if (!std::isnan(v)) {
            centre += v;
            ++present;
        }
    }
    centre = present > 0 ? centre / static_cast<double>(present) : 0.0;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::isnan(values[i]) ? 0.0 : values[i] - centre;
    }

    std::vector<std::uint8_t> usable(len, 1);
    {
        std::size_t missing_in_window = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isnan(values[i])) ++missing_in_window;
            if (i >= m && std::isnan(values[i - m])) --missing_in_window;
            if (i + 1 >= m) usable[i + 1 - m] = missing_in_window == 0 ? 1 : 0;
        }
    }
    if (std::none_of(usable.begin(), usable.end(), [](std::uint8_t u) { return u != 0; })) {
        throw std::invalid_argument("self_join: every window overlaps a missing reading");
    }

    std::vector<WindowStats> stats(len);
    std::vector<double> self_term(len);
    std::vector<double> inv_norm(len); // 1 / sqrt(sum of squared deviations)
    const auto md = static_cast<double>(m);
    for (std::size_t i = 0; i < len; ++i) {
        stats[i] = window_stats(std::span<const double>(w).subspan(i, m));
        if (!usable[i]) {
            self_term[i] = kInf;
            inv_norm[i] = 0.0;
        } else if (stats[i].inv_sd == 0.0) {
            self_term[i] = 0.0;
            inv_norm[i] = 0.0;
        } else {
            self_term[i] = md;
            inv_norm[i] = stats[i].inv_sd / std::sqrt(md);
        }
    }

    std::vector<double> df(len - 1);
    std::vector<double> dg(len - 1);
    for (std::size_t i = 0; i + 1 < len; ++i) {
        df[i] = 0.5 * (w[i + m] - w[i]);
        dg[i] = (w[i + m] - stats[i + 1].mean) + (w[i] - stats[i].mean);
    }

    auto direct_cross = [&](std::size_t i, std::size_t j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            acc += (w[i + k] - stats[i].mean) * (w[j + k] - stats[j].mean);
        }
        return acc;
    };

    std::vector<double> best(len, kInf);
    std::vector<std::int64_t> partner(len, -1);
    const double two_m = 2.0 * md;

    auto offer = [&](std::size_t i, std::size_t j, double d2) {
        const auto jj = static_cast<std::int64_t>(j);
        if (d2 < best[i] || (d2 == best[i] && jj < partner[i])) {
            best[i] = d2;
            partner[i] = jj;
        }
    };

    for (std::size_t diag = ez + 1; diag < len; ++diag) {
        double cross = 0.0;
        for (std::size_t i = 0; i + diag < len; ++i) {
            const std::size_t j = i + diag;
            if (i % kRefreshInterval == 0) {
                cross = direct_cross(i, j);
            } else {
                cross += df[i - 1] * dg[j - 1] + df[j - 1] * dg[i - 1];
            }
            double d2 = self_term[i] + self_term[j] - two_m * cross * inv_norm[i] * inv_norm[j];
            if (d2 < kRefineBelow) {
                d2 = explicit_sq_distance(std::span<const double>(w).subspan(i, m), stats[i],
                                          std::span<const double>(w).subspan(j, m), stats[j]);
            }
            offer(i, j, d2);
            offer(j, i, d2);
        }
    }

    MatrixProfileResult out;
    out.window = m;
    out.exclusion = ez;
    out.distances.assign(len, kInf);
    out.neighbor_index.assign(len, -1);
    out.valid.assign(len, 0);
    for (std::size_t i = 0; i < len; ++i) {
        if (usable[i] && partner[i] >= 0 && std::isfinite(best[i])) {
            out.distances[i] = std::sqrt(std::max(0.0, best[i]));
            out.neighbor_index[i] = partner[i];
            out.valid[i] = 1;
        }
    }
    return out;
}

MatrixProfileResult self_join(const ingest::MeterSeries& series, std::size_t window,
                              std::optional<std::size_t> exclusion) {
    return self_join(std::span<const double>(series.values), window, exclusion);
}

std::string_view to_string(Aggregation a) { return a == Aggregation::DayStart ? "day-start" : "day-mean"; }

std::optional<Aggregation> parse_aggregation(std::string_view text) {
    if (text == "day-start") return Aggregation::DayStart;
    if (text == "day-mean") return Aggregation::DayMean;
    return std::nullopt;
}

std::vector<DailyValue> daily_mp(const MatrixProfileResult& profile, const ingest::MeterSeries& series,
                                 Aggregation aggregation) {
    if (profile.window != 24) {
        throw std::invalid_argument("daily_mp: daily aggregation needs a 24-hour window, got " +
                                    std::to_string(profile.window));
    }
    if (series.size() < 24 || profile.size() != series.size() - 23) {
        throw std::invalid_argument("daily_mp: profile does not match the series length");
    }
    const auto missing_day = ingest::unevaluable_days(series);
    std::vector<DailyValue> out;
    out.reserve(series.day_count());
    for (std::size_t d = 0; d < series.day_count(); ++d) {
        DailyValue dv;
        dv.date = series.day(d);
        dv.weekday = weekday_of(dv.date);
        if (!missing_day[d]) {
            if (aggregation == Aggregation::DayStart) {
                const std::size_t idx = 24 * d;
                if (profile.is_valid(idx)) {
                    dv.value = profile.distances[idx];
                }
            } else {
                double sum = 0.0;
                std::size_t count = 0;
                for (std::size_t idx = 24 * d; idx < 24 * d + 24 && idx < profile.size(); ++idx) {
                    if (profile.is_valid(idx)) {
                        sum += profile.distances[idx];
                        ++count;
                    }
                }
                if (count > 0) {
                    dv.value = sum / static_cast<double>(count);
                }
            }
        }
        out.push_back(dv);
    }
    return out;
}

namespace {

std::vector<DailyMPSample> collect(std::span<const BuildingDaily> buildings, bool per_building) {
    using Key = std::tuple<std::string, std::string, std::int64_t>;
    std::map<Key, DailyMPSample> pooled;
    for (const auto& b : buildings) {
        const std::string owner = per_building ? b.building_id : std::string{};
        for (const auto& day : b.days) {
            auto [it, inserted] = pooled.try_emplace(Key{b.site_id, owner, day.date.days});
            if (inserted) {
                it->second.site_id = b.site_id;
                it->second.building_id = owner;
                it->second.date = day.date;
                it->second.weekday = day.weekday;
            }
            if (day.value) {
                it->second.values.push_back(*day.value);
            }
        }
    }
    std::vector<DailyMPSample> out;
    out.reserve(pooled.size());
    for (auto& [key, sample] : pooled) {
        out.push_back(std::move(sample));
    }
    return out;
}

} // namespace

std::vector<DailyMPSample> collect_site_samples(std::span<const BuildingDaily> buildings) {
    return collect(buildings, false);
}

std::vector<DailyMPSample> collect_building_samples(std::span<const BuildingDaily> buildings) {
    return collect(buildings, true);
}

void write_profile_csv(std::ostream& out, const MatrixProfileResult& profile) {
    out << "index,distance,neighbor_index,valid\n";
    for (std::size_t i = 0; i < profile.size(); ++i) {
        out << i << ',' << csv::format_double(profile.distances[i]) << ',' << profile.neighbor_index[i] << ','
            << static_cast<int>(profile.valid[i]) << '\n';
    }
}

} // namespace aldi::mp
