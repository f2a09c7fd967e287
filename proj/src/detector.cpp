#include "aldi/detector.hpp"

#include "aldi/csv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace aldi::detect {

namespace {

using GroupKey = std::pair<std::string, std::string>;

std::string group_name(const GroupKey& g) { return g.second.empty() ? g.first : g.first + "/" + g.second; }

Granularity daily_granularity(std::span<const DValueRecord> records, std::span<const LabelKey> unevaluable) {
    bool any_building = false;
    bool any_site = false;
    for (const auto& r : records) {
        (r.building_id.empty() ? any_site : any_building) = true;
    }
    for (const auto& k : unevaluable) {
        (k.building_id.empty() ? any_site : any_building) = true;
    }
    if (any_site && any_building) {
        throw std::invalid_argument("records mix site-level and per-building D-values");
    }
    return any_building ? Granularity::BuildingDay : Granularity::SiteDay;
}

LabelKey key_of(const DValueRecord& r) { return LabelKey{r.site_id, r.building_id, r.date.days}; }

void carry_unevaluable(LabelSet& labels, std::span<const LabelKey> unevaluable) {
    for (const auto& k : unevaluable) {
        labels.set(k, Label::Unevaluable);
    }
}

} // namespace

DValueTable compute_dvalues(std::span<const mp::DailyMPSample> samples, bool leave_one_out) {
    std::map<GroupKey, std::vector<const mp::DailyMPSample*>> groups;
    for (const auto& s : samples) {
        groups[GroupKey{s.site_id, s.building_id}].push_back(&s);
    }

    DValueTable table;
    for (const auto& [group, members] : groups) {
        std::array<std::vector<double>, 7> pool;
        std::array<bool, 7> present{};
        for (const auto* s : members) {
            const auto w = static_cast<std::size_t>(s->weekday);
            present[w] = true;
            pool[w].insert(pool[w].end(), s->values.begin(), s->values.end());
        }
        for (std::size_t w = 0; w < 7; ++w) {
            if (present[w] && pool[w].empty()) {
                throw std::invalid_argument("group '" + group_name(group) + "' has no matrix-profile values for " +
                                            std::string(weekday_name(static_cast<Weekday>(w))));
            }
        }

        std::vector<const mp::DailyMPSample*> ordered = members;
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto* a, const auto* b) { return a->date < b->date; });
        for (const auto* s : ordered) {
            const LabelKey key{s->site_id, s->building_id, s->date.days};
            if (s->values.empty()) {
                table.unevaluable.push_back(key);
                continue;
            }
            const auto& reference = pool[static_cast<std::size_t>(s->weekday)];
            stats::KSResult ks;
            if (leave_one_out) {
                std::vector<double> rest = reference;
                for (double v : s->values) {
                    // remove one occurrence per value of the date's own sample
                    auto it = std::find(rest.begin(), rest.end(), v);
                    if (it != rest.end()) rest.erase(it);
                }
                if (rest.empty()) {
                    table.unevaluable.push_back(key);
                    continue;
                }
                ks = stats::ks_two_sample(s->values, rest);
            } else {
                ks = stats::ks_two_sample(s->values, reference);
            }
            table.records.push_back(DValueRecord{s->site_id, s->building_id, s->date, s->weekday, ks.d_value,
                                                 ks.p_value, s->values.size()});
        }
    }
    return table;
}

GmmThreshold gmm_threshold(double mu_max, std::size_t n_components) {
    if (n_components == 0) {
        throw std::invalid_argument("gmm_threshold: no components");
    }
    GmmThreshold t;
    t.n_components = n_components;
    t.mu_max = mu_max;
    t.k_fraction = 1.0 - mu_max;
    // The guard keeps products like 0.3 * 10 = 3.0000000000000004 from
    // rounding up to the next integer.
    const double raw = std::ceil(t.k_fraction * static_cast<double>(n_components) - 1e-9);
    const double clamped = std::clamp(raw, 1.0, static_cast<double>(n_components));
    t.n_nondiscord = static_cast<std::size_t>(clamped);
    for (std::size_t c = 0; c < t.n_nondiscord; ++c) {
        t.nondiscord_components.push_back(c);
    }
    return t;
}

GmmThreshold gmm_threshold(const stats::GaussianMixture1D& gmm) { return gmm_threshold(gmm.max_mean(), gmm.size()); }

AldiPlusPlusResult aldi_plus_plus(std::span<const DValueRecord> records, std::size_t n_components, std::uint64_t seed,
                                  std::span<const LabelKey> unevaluable) {
    AldiPlusPlusResult result;
    result.labels = LabelSet(daily_granularity(records, unevaluable), std::string(method::kAldiPlusPlus));

    std::map<GroupKey, std::vector<const DValueRecord*>> groups;
    for (const auto& r : records) {
        groups[GroupKey{r.site_id, r.building_id}].push_back(&r);
    }
    for (const auto& [group, members] : groups) {
        if (members.size() < n_components) {
            result.diagnostics.push_back("group '" + group_name(group) + "': " + std::to_string(members.size()) +
                                         " evaluable days cannot support " + std::to_string(n_components) +
                                         " mixture components; labelled unevaluable");
            for (const auto* r : members) {
                result.labels.set(key_of(*r), LabelEntry{Label::Unevaluable, r->d_value, r->p_value});
            }
            continue;
        }
        std::vector<double> d_values;
        d_values.reserve(members.size());
        for (const auto* r : members) {
            d_values.push_back(r->d_value);
        }
        GroupModel model{stats::fit_gmm(d_values, n_components, seed), {}};
        model.threshold = gmm_threshold(model.mixture);
        for (const auto* r : members) {
            const std::size_t c = stats::responsibility(model.mixture, r->d_value);
            const Label label = model.threshold.is_nondiscord(c) ? Label::NonDiscord : Label::Discord;
            result.labels.set(key_of(*r), LabelEntry{label, r->d_value, r->p_value});
        }
        result.models.emplace(group_name(group), std::move(model));
    }
    carry_unevaluable(result.labels, unevaluable);
    return result;
}

LabelSet aldi_baseline(std::span<const DValueRecord> records, double p_threshold, std::span<const LabelKey> unevaluable) {
    if (!(p_threshold > 0.0 && p_threshold < 1.0)) {
        throw std::invalid_argument("aldi_baseline: p-value threshold must lie in (0, 1)");
    }
    LabelSet labels(daily_granularity(records, unevaluable), std::string(method::kAldi));
    for (const auto& r : records) {
        const Label label = r.p_value < p_threshold ? Label::Discord : Label::NonDiscord;
        labels.set(key_of(r), LabelEntry{label, r.d_value, r.p_value});
    }
    carry_unevaluable(labels, unevaluable);
    return labels;
}

namespace {

void two_sd_into(LabelSet& labels, const ingest::Portfolio& portfolio) {
    for (const auto& s : portfolio.series) {
        double sum = 0.0;
        std::size_t n = 0;
        for (double v : s.values) {
            if (!ingest::is_missing(v)) {
                sum += v;
                ++n;
            }
        }
        const bool usable = n >= 2;
        double mean = 0.0;
        double sd = 0.0;
        if (usable) {
            mean = sum / static_cast<double>(n);
            double ss = 0.0;
            for (double v : s.values) {
                if (!ingest::is_missing(v)) ss += (v - mean) * (v - mean);
            }
            sd = std::sqrt(ss / static_cast<double>(n));
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            Label label = Label::Unevaluable;
            if (usable && !s.missing(i)) {
                label = std::fabs(s.values[i] - mean) > 2.0 * sd ? Label::Discord : Label::NonDiscord;
            }
            labels.set(LabelKey{s.site_id, s.building_id, s.time_at(i).hours}, label);
        }
    }
}

} // namespace

LabelSet two_sd_baseline(const ingest::Portfolio& portfolio) {
    return two_sd_baseline(std::span<const ingest::Portfolio>(&portfolio, 1));
}

LabelSet two_sd_baseline(std::span<const ingest::Portfolio> portfolios) {
    LabelSet labels(Granularity::BuildingHour, std::string(method::kTwoSd));
    for (const auto& p : portfolios) {
        two_sd_into(labels, p);
    }
    return labels;
}

LabelSet hourly_to_daily(const LabelSet& hourly, int threshold_hours) {
    if (hourly.granularity() != Granularity::BuildingHour) {
        throw std::invalid_argument("hourly_to_daily: input must be building-hour labels");
    }
    if (threshold_hours < 1 || threshold_hours > 24) {
        throw std::invalid_argument("hourly_to_daily: threshold must lie in [1, 24]");
    }
    struct Tally {
        int discord = 0;
        int evaluable = 0;
    };
    std::map<LabelKey, Tally> days;
    for (const auto& [key, entry] : hourly) {
        auto& t = days[LabelKey{key.site_id, key.building_id, HourStamp{key.time}.date().days}];
        if (entry.label != Label::Unevaluable) {
            ++t.evaluable;
            if (entry.label == Label::Discord) ++t.discord;
        }
    }
    LabelSet daily(Granularity::BuildingDay, hourly.method());
    for (const auto& [key, t] : days) {
        Label label = Label::Unevaluable;
        if (t.evaluable > 0) {
            label = t.discord >= threshold_hours ? Label::Discord : Label::NonDiscord;
        }
        daily.set(key, label);
    }
    return daily;
}

LabelSet daily_to_hourly(const LabelSet& daily, std::span<const ingest::Portfolio> portfolios) {
    if (daily.granularity() == Granularity::BuildingHour) {
        throw std::invalid_argument("daily_to_hourly: input is already hourly");
    }
    const bool site_level = daily.granularity() == Granularity::SiteDay;
    LabelSet hourly(Granularity::BuildingHour, daily.method());
    for (const auto& p : portfolios) {
        for (const auto& s : p.series) {
            for (std::size_t d = 0; d < p.day_count(); ++d) {
                const Date day = s.day(d);
                const LabelKey daily_key{s.site_id, site_level ? std::string{} : s.building_id, day.days};
                const LabelEntry* entry = daily.find(daily_key);
                const Label label = entry ? entry->label : Label::Unevaluable;
                for (std::int64_t h = 0; h < 24; ++h) {
                    hourly.set(LabelKey{s.site_id, s.building_id, start_of(day).hours + h}, label);
                }
            }
        }
    }
    return hourly;
}

LabelSet broadcast_site_days(const LabelSet& site_days, const LabelSet& layout) {
    if (site_days.granularity() != Granularity::SiteDay || layout.granularity() != Granularity::BuildingDay) {
        throw std::invalid_argument("broadcast_site_days: expects site-day labels and a building-day layout");
    }
    LabelSet out(Granularity::BuildingDay, site_days.method());
    for (const auto& [key, unused] : layout) {
        const LabelEntry* entry = site_days.find(LabelKey{key.site_id, {}, key.time});
        out.set(key, entry ? *entry : LabelEntry{});
    }
    return out;
}

void write_train_filter(std::ostream& out, const LabelSet& hourly) {
    if (hourly.granularity() != Granularity::BuildingHour) {
        throw std::invalid_argument("train filter needs building-hour labels");
    }
    out << "building_id,timestamp,keep\n";
    for (const auto& [key, entry] : hourly) {
        out << key.building_id << ',' << format_timestamp(HourStamp{key.time}) << ','
            << (entry.label == Label::NonDiscord ? 1 : 0) << '\n';
    }
}

void export_train_filter(const LabelSet& hourly, const std::filesystem::path& path) {
    std::ostringstream buf;
    write_train_filter(buf, hourly);
    csv::write_file_atomic(path, buf.str());
}

void write_dvalues(std::ostream& out, std::span<const DValueRecord> records) {
    std::vector<const DValueRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        return std::tie(a->site_id, a->building_id, a->date) < std::tie(b->site_id, b->building_id, b->date);
    });
    out << "site_id,building_id,date,weekday,d_value,p_value,sample_size\n";
    for (const auto* r : sorted) {
        out << r->site_id << ',' << r->building_id << ',' << format_date(r->date) << ','
            << weekday_name(r->weekday) << ',' << csv::format_double(r->d_value) << ','
            << csv::format_double(r->p_value) << ',' << r->sample_size << '\n';
    }
}

} // namespace aldi::detect
