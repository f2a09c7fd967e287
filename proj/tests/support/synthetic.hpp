#pragma once

#include "aldi/ingest.hpp"
#include "aldi/time.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace aldi::testing {

enum class AnomalyKind { Flatline, Spike };

struct InjectedAnomaly {
    Date date;
    AnomalyKind kind;
};

struct SyntheticOptions {
    std::size_t buildings = 10;
    std::size_t weeks = 52;
    std::uint64_t seed = 1;
    double noise = 0.03; ///< median multiplicative noise sd
    /// Per-building noise sd is noise * exp(spread * (u - 0.5)), u uniform.
    double noise_spread = 0.0;
    std::size_t flatlines = 0;
    std::size_t spikes = 0;
    /// Fraction of the site's buildings hit on an anomalous date (at least one).
    double affected_fraction = 1.0;
    std::string site_id = "site_a";
    Date first_day = make_date(2016, 1, 4); ///< a Monday
};

struct SyntheticPortfolio {
    ingest::Portfolio portfolio;
    std::vector<InjectedAnomaly> anomalies; ///< sorted by date
};

/// Office-like buildings with a strong weekday/weekend cycle. Injected
/// anomalies hit `affected_fraction` of the buildings on the same date: flatlines hold
/// the building's mean reading all day, spikes lift a random 14-18 hour block
/// by five standard deviations of the building's series.
[[nodiscard]] SyntheticPortfolio make_portfolio(const SyntheticOptions& options);

/// Exactly periodic series of `periods` repetitions of `pattern`.
[[nodiscard]] std::vector<double> periodic(const std::vector<double>& pattern, std::size_t periods);

/// Random test series of length n: a noisy daily sine on a random walk, with
/// occasional flat runs and, when `with_gaps`, a few NaN holes.
[[nodiscard]] std::vector<double> random_series(std::uint64_t seed, std::size_t n, bool with_gaps = false);

} // namespace aldi::testing
