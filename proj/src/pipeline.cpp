#include "aldi/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace aldi::pipeline {

std::string_view to_string(Method m) {
    switch (m) {
    case Method::AldiPlusPlus:
        return method::kAldiPlusPlus;
    case Method::Aldi:
        return method::kAldi;
    case Method::TwoSd:
        return method::kTwoSd;
    }
    return method::kAldiPlusPlus;
}

std::optional<Method> parse_method(std::string_view text) {
    if (text == method::kAldiPlusPlus) return Method::AldiPlusPlus;
    if (text == method::kAldi) return Method::Aldi;
    if (text == method::kTwoSd) return Method::TwoSd;
    return std::nullopt;
}

std::vector<mp::BuildingDaily> building_daily_profiles(std::span<const ingest::Portfolio> portfolios,
                                                       std::size_t window, mp::Aggregation aggregation,
                                                       unsigned threads) {
    std::vector<const ingest::MeterSeries*> jobs;
    for (const auto& p : portfolios) {
        for (const auto& s : p.series) jobs.push_back(&s);
    }
    std::vector<mp::BuildingDaily> out(jobs.size());

    auto run_one = [&](std::size_t idx) {
        const auto& s = *jobs[idx];
        auto& slot = out[idx];
        slot.site_id = s.site_id;
        slot.building_id = s.building_id;
        bool any_present = false;
        for (double v : s.values) {
            if (!ingest::is_missing(v)) {
                any_present = true;
                break;
            }
        }
        if (!any_present || s.size() < 2 * window) {
            // Nothing to profile: every day stays unevaluable.
            for (std::size_t d = 0; d < s.day_count(); ++d) {
                slot.days.push_back(mp::DailyValue{s.day(d), weekday_of(s.day(d)), std::nullopt});
            }
            return;
        }
        try {
            const auto profile = mp::self_join(s, window);
            slot.days = mp::daily_mp(profile, s, aggregation);
        } catch (const std::invalid_argument&) {
            if (window != 24) throw;
            // every window overlapped a gap
            slot.days.clear();
            for (std::size_t d = 0; d < s.day_count(); ++d) {
                slot.days.push_back(mp::DailyValue{s.day(d), weekday_of(s.day(d)), std::nullopt});
            }
        }
    };

    unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < jobs.size(); i = next++) {
                try {
                    run_one(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

namespace {

// D-values per site, isolating sites whose weekday reference is empty.
detect::DValueTable site_dvalues(std::span<const mp::DailyMPSample> samples, bool leave_one_out,
                                 std::vector<std::string>& diagnostics) {
    detect::DValueTable all;
    std::size_t begin = 0;
    while (begin < samples.size()) {
        std::size_t end = begin;
        while (end < samples.size() && samples[end].site_id == samples[begin].site_id) ++end;
        const auto site = samples.subspan(begin, end - begin);
        try {
            auto table = detect::compute_dvalues(site, leave_one_out);
            all.records.insert(all.records.end(), table.records.begin(), table.records.end());
            all.unevaluable.insert(all.unevaluable.end(), table.unevaluable.begin(), table.unevaluable.end());
        } catch (const std::invalid_argument& e) {
            diagnostics.push_back("site '" + samples[begin].site_id + "': " + e.what() + "; labelled unevaluable");
            for (const auto& s : site) {
                all.unevaluable.push_back(LabelKey{s.site_id, s.building_id, s.date.days});
            }
        }
        begin = end;
    }
    return all;
}

} // namespace

DetectOutput detect(std::span<const ingest::Portfolio> portfolios, const DetectOptions& options) {
    DetectOutput out;
    if (options.method == Method::TwoSd) {
        out.labels = detect::two_sd_baseline(portfolios);
        return out;
    }

    const auto daily = building_daily_profiles(portfolios, options.window, options.aggregation, options.threads);
    // Samples come back ordered by (site, building, date).
    const auto samples =
        options.per_building ? mp::collect_building_samples(daily) : mp::collect_site_samples(daily);
    auto table = site_dvalues(samples, options.leave_one_out, out.diagnostics);

    if (options.method == Method::Aldi) {
        out.labels = detect::aldi_baseline(table.records, options.p_threshold, table.unevaluable);
    } else {
        auto result = detect::aldi_plus_plus(table.records, options.n_components, options.seed, table.unevaluable);
        out.labels = std::move(result.labels);
        out.diagnostics.insert(out.diagnostics.end(), result.diagnostics.begin(), result.diagnostics.end());
    }
    out.dvalues = std::move(table.records);
    return out;
}

} // namespace aldi::pipeline
