#pragma once

#include "aldi/ingest.hpp"
#include "aldi/pipeline.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aldi {

/// Everything needed to reproduce a run. Serialized as `key = value` lines;
/// `#` starts a comment. Building-to-site grouping uses `site.<building> = <site>`.
struct RunConfig {
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path out = "aldi-out";
    std::optional<std::filesystem::path> truth;

    ingest::ColumnMap columns;
    ingest::SiteMap sites;
    std::size_t max_gap = 3;

    pipeline::Method method = pipeline::Method::AldiPlusPlus;
    std::vector<pipeline::Method> methods{pipeline::Method::TwoSd, pipeline::Method::Aldi,
                                          pipeline::Method::AldiPlusPlus};
    std::size_t n_components = 7;
    double p_threshold = 0.01;
    mp::Aggregation aggregation = mp::Aggregation::DayStart;
    bool per_building = false;
    bool leave_one_out = false;
    std::uint64_t seed = 0;
    std::size_t window = 24;
    std::size_t runs = 10;
    std::optional<int> to_daily;

    /// Applies one setting. Throws ConfigError on unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    /// Throws ConfigError when settings are inconsistent.
    void validate() const;

    [[nodiscard]] pipeline::DetectOptions detect_options() const;
    [[nodiscard]] std::string serialize() const;
};

[[nodiscard]] RunConfig parse_config(std::istream& in, RunConfig base = {});
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

} // namespace aldi
