#pragma once

#include "aldi/ingest.hpp"
#include "aldi/labels.hpp"
#include "aldi/matrix_profile.hpp"
#include "aldi/stats.hpp"
#include "aldi/time.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace aldi::detect {

/// KS outcome of one (site, date) sample against its weekday reference.
/// `building_id` is set only in per-building mode.
struct DValueRecord {
    std::string site_id;
    std::string building_id;
    Date date;
    Weekday weekday = Weekday::Monday;
    double d_value = 0.0;
    double p_value = 1.0;
    std::size_t sample_size = 0;
};

struct DValueTable {
    std::vector<DValueRecord> records;
    /// Dates whose sample (or leave-one-out reference) was empty.
    std::vector<LabelKey> unevaluable;
};

/// Tests every non-empty sample against the pooled values of all dates of the
/// same weekday in its group (site, or site+building). With `leave_one_out`
/// the date's own values are removed from its reference. Throws
/// std::invalid_argument when a weekday present in a group has no pooled values.
[[nodiscard]] DValueTable compute_dvalues(std::span<const mp::DailyMPSample> samples, bool leave_one_out = false);

struct GmmThreshold {
    std::size_t n_components = 0;
    double mu_max = 0.0;
    double k_fraction = 0.0; ///< 1 - mu_max
    std::size_t n_nondiscord = 1;
    /// Indices into the mean-sorted components: 0 .. n_nondiscord-1.
    std::vector<std::size_t> nondiscord_components;

    [[nodiscard]] bool is_nondiscord(std::size_t component) const { return component < n_nondiscord; }
};

/// n_nondiscord = ceil((1 - mu_max) * n_components), clamped to [1, n_components].
[[nodiscard]] GmmThreshold gmm_threshold(double mu_max, std::size_t n_components);
[[nodiscard]] GmmThreshold gmm_threshold(const stats::GaussianMixture1D& gmm);

struct GroupModel {
    stats::GaussianMixture1D mixture;
    GmmThreshold threshold;
};

struct AldiPlusPlusResult {
    LabelSet labels;
    /// Keyed by "site" or "site/building".
    std::map<std::string, GroupModel> models;
    std::vector<std::string> diagnostics;
};

/// Parameter-less labelling: a mixture over each group's D-values, the lowest
/// mean components (count from gmm_threshold) are non-discord. Groups with
/// fewer records than components are labelled unevaluable with a diagnostic.
/// Keys listed in `unevaluable` are carried through as unevaluable.
[[nodiscard]] AldiPlusPlusResult aldi_plus_plus(std::span<const DValueRecord> records, std::size_t n_components = 7,
                                                std::uint64_t seed = 0, std::span<const LabelKey> unevaluable = {});

/// Fixed p-value filter: discord iff p_value < p_threshold.
/// Throws std::invalid_argument unless 0 < p_threshold < 1.
[[nodiscard]] LabelSet aldi_baseline(std::span<const DValueRecord> records, double p_threshold = 0.01,
                                     std::span<const LabelKey> unevaluable = {});

/// Hour is discord iff |reading - mean| > 2 sd over the building's present
/// readings; missing hours are unevaluable, as are all hours of a building
/// with fewer than two readings.
[[nodiscard]] LabelSet two_sd_baseline(const ingest::Portfolio& portfolio);
[[nodiscard]] LabelSet two_sd_baseline(std::span<const ingest::Portfolio> portfolios);

/// Day is discord iff at least `threshold_hours` of its evaluable hours are
/// discord; days without an evaluable hour are unevaluable.
[[nodiscard]] LabelSet hourly_to_daily(const LabelSet& hourly, int threshold_hours = 14);

/// Expands daily labels to every hour of every covered building. Site-day
/// labels broadcast to all buildings of the matching portfolio; days without a
/// label become unevaluable.
[[nodiscard]] LabelSet daily_to_hourly(const LabelSet& daily, std::span<const ingest::Portfolio> portfolios);

/// Broadcasts site-day labels onto the building-day keys of `layout`
/// (same site, same day). Keys without a site-day label become unevaluable.
[[nodiscard]] LabelSet broadcast_site_days(const LabelSet& site_days, const LabelSet& layout);

/// building_id,timestamp,keep where keep = 0 for discord and unevaluable hours.
void write_train_filter(std::ostream& out, const LabelSet& hourly);
void export_train_filter(const LabelSet& hourly, const std::filesystem::path& path);

/// D-value table CSV: site_id,building_id,date,weekday,d_value,p_value,sample_size
void write_dvalues(std::ostream& out, std::span<const DValueRecord> records);

} // namespace aldi::detect
