#pragma once

#include "aldi/detector.hpp"
#include "aldi/ingest.hpp"
#include "aldi/labels.hpp"
#include "aldi/matrix_profile.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aldi::pipeline {

enum class Method { AldiPlusPlus, Aldi, TwoSd };

[[nodiscard]] std::string_view to_string(Method m);
[[nodiscard]] std::optional<Method> parse_method(std::string_view text);

struct DetectOptions {
    Method method = Method::AldiPlusPlus;
    std::size_t n_components = 7;
    double p_threshold = 0.01;
    mp::Aggregation aggregation = mp::Aggregation::DayStart;
    /// Compare each building with its own weekday history instead of pooling the site.
    bool per_building = false;
    bool leave_one_out = false;
    std::uint64_t seed = 0;
    std::size_t window = 24;
    /// Worker threads for the matrix profiles; 0 picks hardware concurrency.
    unsigned threads = 0;
};

struct DetectOutput {
    LabelSet labels;
    std::vector<detect::DValueRecord> dvalues;
    std::vector<std::string> diagnostics;
};

/// Daily matrix-profile values of every building, in portfolio order.
[[nodiscard]] std::vector<mp::BuildingDaily> building_daily_profiles(std::span<const ingest::Portfolio> portfolios,
                                                                    std::size_t window, mp::Aggregation aggregation,
                                                                    unsigned threads = 0);

/// Runs the chosen labeller over already aligned (and imputed) portfolios.
/// ALDI-family methods yield site-day labels, or building-day labels with
/// `per_building`; 2sd yields building-hour labels. A site whose weekday
/// reference is empty is labelled unevaluable and reported in diagnostics.
[[nodiscard]] DetectOutput detect(std::span<const ingest::Portfolio> portfolios, const DetectOptions& options);

} // namespace aldi::pipeline
