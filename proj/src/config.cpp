#include "aldi/config.hpp"

#include "aldi/csv.hpp"
#include "aldi/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace aldi {

namespace {

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    const auto parsed = csv::parse_reading(value);
    if (!parsed || !parsed->has_value()) {
        throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
    }
    return **parsed;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("'" + std::string(key) + "' expects true or false, got '" + std::string(value) + "'");
}

pipeline::Method parse_method_or_throw(std::string_view value) {
    const auto m = pipeline::parse_method(value);
    if (!m) {
        throw ConfigError("unknown method '" + std::string(value) + "' (expected aldi++, aldi or 2sd)");
    }
    return *m;
}

std::vector<std::string> split_list(std::string_view value) {
    std::vector<std::string> out;
    for (auto& item : csv::split_line(value)) {
        auto t = csv::trim(item);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

} // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
    const std::string value = csv::trim(raw);
    if (key.starts_with("site.")) {
        const auto building = key.substr(5);
        if (building.empty() || value.empty()) {
            throw ConfigError("site mapping needs 'site.<building> = <site>'");
        }
        sites.building_to_site.insert_or_assign(std::string(building), value);
    } else if (key == "input") {
        inputs.clear();
        for (auto& p : split_list(value)) inputs.emplace_back(p);
    } else if (key == "out") {
        out = value;
    } else if (key == "truth") {
        if (value.empty()) truth.reset();
        else truth = value;
    } else if (key == "timestamp_column") {
        columns.timestamp = value;
    } else if (key == "building_column") {
        columns.building = value;
    } else if (key == "reading_column") {
        columns.reading = value;
    } else if (key == "site_column") {
        columns.site = value;
    } else if (key == "default_site") {
        sites.default_site = value;
    } else if (key == "max_gap") {
        max_gap = parse_integer<std::size_t>(key, value);
    } else if (key == "method") {
        method = parse_method_or_throw(value);
    } else if (key == "methods") {
        methods.clear();
        for (const auto& m : split_list(value)) methods.push_back(parse_method_or_throw(m));
    } else if (key == "n_components") {
        n_components = parse_integer<std::size_t>(key, value);
    } else if (key == "p_threshold") {
        p_threshold = parse_real(key, value);
    } else if (key == "aggregation") {
        const auto a = mp::parse_aggregation(value);
        if (!a) throw ConfigError("aggregation must be day-start or day-mean");
        aggregation = *a;
    } else if (key == "granularity") {
        if (value == "site") per_building = false;
        else if (value == "building") per_building = true;
        else throw ConfigError("granularity must be site or building");
    } else if (key == "leave_one_out") {
        leave_one_out = parse_bool(key, value);
    } else if (key == "seed") {
        seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "window") {
        window = parse_integer<std::size_t>(key, value);
    } else if (key == "runs") {
        runs = parse_integer<std::size_t>(key, value);
    } else if (key == "to_daily") {
        if (value.empty() || value == "none") to_daily.reset();
        else to_daily = parse_integer<int>(key, value);
    } else {
        throw ConfigError("unknown configuration key '" + std::string(key) + "'");
    }
}

void RunConfig::validate() const {
    if (n_components == 0) throw ConfigError("n_components must be positive");
    if (!(p_threshold > 0.0 && p_threshold < 1.0)) throw ConfigError("p_threshold must lie in (0, 1)");
    if (window < 2) throw ConfigError("window must be at least 2");
    if (runs == 0) throw ConfigError("runs must be at least 1");
    if (methods.empty()) throw ConfigError("methods must name at least one method");
    if (to_daily && (*to_daily < 1 || *to_daily > 24)) throw ConfigError("to_daily must lie in [1, 24]");
}

pipeline::DetectOptions RunConfig::detect_options() const {
    pipeline::DetectOptions o;
    o.method = method;
    o.n_components = n_components;
    o.p_threshold = p_threshold;
    o.aggregation = aggregation;
    o.per_building = per_building;
    o.leave_one_out = leave_one_out;
    o.seed = seed;
    o.window = window;
    return o;
}

std::string RunConfig::serialize() const {
    std::ostringstream s;
    s << "# resolved aldi run configuration\n";
    s << "input = ";
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        s << (i ? "," : "") << inputs[i].string();
    }
    s << '\n';
    s << "out = " << out.string() << '\n';
    if (truth) s << "truth = " << truth->string() << '\n';
    s << "timestamp_column = " << columns.timestamp << '\n';
    s << "building_column = " << columns.building << '\n';
    s << "reading_column = " << columns.reading << '\n';
    s << "site_column = " << columns.site << '\n';
    s << "default_site = " << sites.default_site << '\n';
    s << "max_gap = " << max_gap << '\n';
    s << "method = " << pipeline::to_string(method) << '\n';
    s << "methods = ";
    for (std::size_t i = 0; i < methods.size(); ++i) {
        s << (i ? "," : "") << pipeline::to_string(methods[i]);
    }
    s << '\n';
    s << "n_components = " << n_components << '\n';
    s << "p_threshold = " << csv::format_double(p_threshold) << '\n';
    s << "aggregation = " << mp::to_string(aggregation) << '\n';
    s << "granularity = " << (per_building ? "building" : "site") << '\n';
    s << "leave_one_out = " << (leave_one_out ? "true" : "false") << '\n';
    s << "seed = " << seed << '\n';
    s << "window = " << window << '\n';
    s << "runs = " << runs << '\n';
    s << "to_daily = " << (to_daily ? std::to_string(*to_daily) : std::string("none")) << '\n';
    for (const auto& [building, site] : sites.building_to_site) {
        s << "site." << building << " = " << site << '\n';
    }
    return s.str();
}

RunConfig parse_config(std::istream& in, RunConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string t = csv::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            base.set(csv::trim(std::string_view(t).substr(0, eq)), std::string_view(t).substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    return parse_config(in, std::move(base));
}

} // namespace aldi
