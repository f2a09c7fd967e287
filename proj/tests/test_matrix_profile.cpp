#include <doctest.h>

#include "aldi/ingest.hpp"
#include "aldi/matrix_profile.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

using namespace aldi;
using namespace aldi::mp;
using aldi::testing::brute_distance;
using aldi::testing::brute_profile;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

ingest::MeterSeries series_of(std::vector<double> values, std::string building = "b", std::string site = "s") {
    return ingest::MeterSeries{std::move(building), std::move(site), start_of(make_date(2016, 1, 4)),
                               std::move(values)};
}

// Checks self_join against the exhaustive oracle, index by index.
void check_against_oracle(const std::vector<double>& x, std::size_t m, double tol) {
    const auto ez = default_exclusion(m);
    const auto fast = self_join(x, m);
    const auto slow = brute_profile(x, m, ez);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < slow.size(); ++i) {
        CAPTURE(i);
        REQUIRE(fast.is_valid(i) == slow[i].has_value());
        if (!slow[i]) {
            CHECK(std::isinf(fast.distances[i]));
            CHECK(fast.neighbor_index[i] == -1);
            continue;
        }
        CHECK(std::abs(fast.distances[i] - slow[i]->distance) <= tol);
        const auto j = static_cast<std::size_t>(fast.neighbor_index[i]);
        CHECK((i > j ? i - j : j - i) > ez);
        if (fast.neighbor_index[i] != slow[i]->index) {
            // a near tie: the reported partner must be as close as the oracle's
            const double dj = brute_distance(std::span<const double>(x).subspan(i, m),
                                             std::span<const double>(x).subspan(j, m));
            CHECK(std::abs(dj - slow[i]->distance) <= tol);
        }
    }
}

} // namespace

TEST_SUITE("znorm_distance") {
    TEST_CASE("identical and affine copies are at distance zero") {
        const std::vector<double> a{3, 1, 4, 1, 5, 9, 2, 6};
        CHECK(std::abs(znorm_distance(a, a)) <= 1e-12);
        const std::vector<double> x{1, 2, 3};
        const std::vector<double> y{2, 4, 6};
        CHECK(std::abs(znorm_distance(x, y)) <= 1e-12);
    }

    TEST_CASE("reversed ramp") {
        // z-scores of [1,2,3] are (-sqrt(1.5), 0, sqrt(1.5)); two end points differ by 2 sqrt(1.5)
        const std::vector<double> x{1, 2, 3};
        const std::vector<double> y{3, 2, 1};
        CHECK(znorm_distance(x, y) == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-14));
    }

    TEST_CASE("constant windows are zero vectors") {
        const std::vector<double> flat{4, 4, 4, 4};
        const std::vector<double> flat2{9, 9, 9, 9};
        const std::vector<double> ramp{1, 2, 3, 4};
        CHECK(znorm_distance(flat, flat2) == 0.0);
        CHECK(znorm_distance(flat, ramp) == doctest::Approx(2.0)); // sqrt(m)
    }

    TEST_CASE("errors") {
        const std::vector<double> a{1, 2, 3};
        const std::vector<double> b{1, 2};
        const std::vector<double> one{1};
        CHECK_THROWS_AS((void)znorm_distance(a, b), std::invalid_argument);
        CHECK_THROWS_AS((void)znorm_distance(one, one), std::invalid_argument);
    }
}

TEST_SUITE("self_join") {
    TEST_CASE("periodic series with period m has an all-zero profile") {
        std::vector<double> day(24);
        for (std::size_t h = 0; h < 24; ++h) day[h] = std::sin(0.4 * static_cast<double>(h)) + 0.01 * static_cast<double>(h * h);
        const auto x = testing::periodic(day, 10);
        const auto p = self_join(x, 24);
        for (std::size_t i = 0; i < p.size(); ++i) {
            REQUIRE(p.is_valid(i));
            CHECK(p.distances[i] <= 1e-9);
        }
    }

    TEST_CASE("corrupted window holds the profile maximum") {
        std::vector<double> day(24);
        for (std::size_t h = 0; h < 24; ++h) day[h] = 10.0 + 5.0 * std::sin(2.0 * 3.141592653589793 * static_cast<double>(h) / 24.0);
        auto x = testing::periodic(day, 10);
        const std::size_t bad_start = 24 * 6;
        for (std::size_t k = 0; k < 24; ++k) x[bad_start + k] = 10.0 + ((k * 7) % 5);
        const auto p = self_join(x, 24);
        const auto slow = brute_profile(x, 24, default_exclusion(24));
        const auto top = static_cast<std::size_t>(
            std::max_element(p.distances.begin(), p.distances.end()) - p.distances.begin());
        std::size_t oracle_top = 0;
        for (std::size_t i = 0; i < slow.size(); ++i) {
            if (slow[i]->distance > slow[oracle_top]->distance) oracle_top = i;
        }
        CHECK(top == oracle_top);
        // windows overlapping the corrupted day start in (bad_start - 24, bad_start + 24)
        CHECK(top + 24 > bad_start);
        CHECK(top < bad_start + 24);
    }

    TEST_CASE("property: matches the quadratic oracle") {
        for (std::uint64_t seed = 1; seed <= 12; ++seed) {
            CAPTURE(seed);
            std::mt19937_64 rng(seed);
            const std::size_t n = 60 + rng() % 200;
            const std::size_t m = seed % 3 == 0 ? 8 : 24;
            check_against_oracle(testing::random_series(seed, n, seed % 2 == 0), m, 1e-6);
        }
    }

    TEST_CASE("custom exclusion zone") {
        const auto x = testing::random_series(99, 120);
        const auto p = self_join(x, 10, 3);
        const auto slow = brute_profile(x, 10, 3);
        for (std::size_t i = 0; i < slow.size(); ++i) {
            CHECK(std::abs(p.distances[i] - slow[i]->distance) <= 1e-6);
        }
        CHECK(p.exclusion == 3);
    }

    TEST_CASE("property: shift and scale invariance") {
        for (std::uint64_t seed = 20; seed < 26; ++seed) {
            const auto x = testing::random_series(seed, 200);
            std::vector<double> y(x.size());
            std::transform(x.begin(), x.end(), y.begin(), [](double v) { return 3.7 * v + 1000.0; });
            const auto px = self_join(x, 24);
            const auto py = self_join(y, 24);
            for (std::size_t i = 0; i < px.size(); ++i) {
                CHECK(std::abs(px.distances[i] - py.distances[i]) <= 1e-6);
            }
        }
    }

    TEST_CASE("property: masking more readings never lowers a remaining distance") {
        for (std::uint64_t seed = 30; seed < 36; ++seed) {
            auto x = testing::random_series(seed, 240);
            const auto before = self_join(x, 24);
            std::mt19937_64 rng(seed);
            for (int k = 0; k < 3; ++k) x[rng() % x.size()] = kNaN;
            const auto after = self_join(x, 24);
            for (std::size_t i = 0; i < after.size(); ++i) {
                if (after.is_valid(i)) {
                    REQUIRE(before.is_valid(i));
                    CHECK(after.distances[i] >= before.distances[i] - 1e-9);
                }
            }
        }
    }

    TEST_CASE("exact repeats are zero even at large offsets") {
        auto x = testing::random_series(5, 96);
        std::vector<double> rep;
        for (double v : x) rep.push_back(v + 1e6);
        rep.insert(rep.end(), x.begin(), x.end());
        for (double& v : rep) v = v * 1e3;
        const auto p = self_join(rep, 24);
        // window i and i + 96 are affine copies of each other
        for (std::size_t i = 0; i + 96 < p.size(); ++i) CHECK(p.distances[i] <= 1e-9);
    }

    TEST_CASE("flat windows: flat partners are motifs, otherwise sqrt(m)") {
        std::vector<double> x(96, 5.0);
        for (std::size_t i = 48; i < 96; ++i) x[i] = static_cast<double>(i % 7);
        const auto p = self_join(x, 8);
        CHECK(p.distances[0] == 0.0);
        const auto slow = brute_profile(x, 8, default_exclusion(8));
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p.distances[i] - slow[i]->distance) <= 1e-6);
    }

    TEST_CASE("windows over gaps are invalid") {
        auto x = testing::random_series(3, 120);
        x[50] = kNaN;
        const auto p = self_join(x, 24);
        for (std::size_t i = 27; i <= 50; ++i) CHECK_FALSE(p.is_valid(i));
        CHECK(p.is_valid(26));
        CHECK(p.is_valid(51));
    }

    TEST_CASE("errors") {
        const std::vector<double> short_x(47, 1.0);
        CHECK_THROWS_AS((void)self_join(short_x, 24), std::invalid_argument);
        const std::vector<double> x(100, 1.0);
        CHECK_THROWS_AS((void)self_join(x, 1), std::invalid_argument);
        const std::vector<double> gaps(60, kNaN);
        CHECK_THROWS_AS((void)self_join(gaps, 24), std::invalid_argument);
    }

    TEST_CASE("deterministic and dumpable") {
        const auto x = testing::random_series(8, 150);
        const auto a = self_join(x, 24);
        const auto b = self_join(x, 24);
        CHECK(a.distances == b.distances);
        CHECK(a.neighbor_index == b.neighbor_index);
        std::ostringstream out;
        write_profile_csv(out, a);
        const auto text = out.str();
        CHECK(text.rfind("index,distance,neighbor_index,valid\n", 0) == 0);
        CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(a.size() + 1));
    }
}

TEST_SUITE("daily_mp") {
    TEST_CASE("day-start picks each midnight index") {
        const auto s = series_of(testing::random_series(4, 72));
        const auto p = self_join(s, 24);
        const auto days = daily_mp(p, s, Aggregation::DayStart);
        REQUIRE(days.size() == 3);
        for (std::size_t d = 0; d < 3; ++d) {
            CHECK(days[d].date == s.day(d));
            CHECK(days[d].weekday == weekday_of(s.day(d)));
            if (p.is_valid(24 * d)) {
                CHECK(days[d].value == p.distances[24 * d]);
            }
        }
        CHECK(days[0].weekday == Weekday::Monday);
    }

    TEST_CASE("day with an invalid midnight window is unevaluable") {
        auto v = testing::random_series(6, 96);
        v[24] = kNaN;
        const auto s = series_of(v);
        const auto days = daily_mp(self_join(s, 24), s, Aggregation::DayStart);
        CHECK(days[0].value.has_value());
        CHECK_FALSE(days[1].value.has_value());
        CHECK(days[2].value.has_value());
    }

    TEST_CASE("day-mean averages the day's 24 window starts") {
        const auto v = testing::random_series(12, 120);
        const auto s = series_of(v);
        const auto days = daily_mp(self_join(s, 24), s, Aggregation::DayMean);
        const auto slow = brute_profile(v, 24, default_exclusion(24));
        for (std::size_t d = 0; d + 1 < 5; ++d) {
            double sum = 0.0;
            for (std::size_t h = 0; h < 24; ++h) sum += slow[24 * d + h]->distance;
            REQUIRE(days[d].value);
            CHECK(std::abs(*days[d].value - sum / 24.0) <= 1e-6);
        }
        // the last day has only its midnight window start
        REQUIRE(days[4].value);
        CHECK(std::abs(*days[4].value - slow[96]->distance) <= 1e-6);
    }

    TEST_CASE("window other than 24 hours is rejected") {
        const auto s = series_of(testing::random_series(2, 96));
        CHECK_THROWS_AS((void)daily_mp(self_join(s.values, 12), s), std::invalid_argument);
    }

    TEST_CASE("aggregation names") {
        CHECK(parse_aggregation("day-start") == Aggregation::DayStart);
        CHECK(parse_aggregation("day-mean") == Aggregation::DayMean);
        CHECK_FALSE(parse_aggregation("noon"));
        CHECK(to_string(Aggregation::DayMean) == "day-mean");
    }
}

TEST_SUITE("collect_samples") {
    BuildingDaily building(std::string site, std::string id, std::vector<std::optional<double>> values) {
        BuildingDaily b{std::move(site), std::move(id), {}};
        const Date first = make_date(2016, 1, 4);
        for (std::size_t d = 0; d < values.size(); ++d) {
            const Date day{first.days + static_cast<std::int64_t>(d)};
            b.days.push_back(DailyValue{day, weekday_of(day), values[d]});
        }
        return b;
    }

    TEST_CASE("unevaluable building days are skipped") {
        std::vector<BuildingDaily> bs;
        for (int i = 0; i < 5; ++i) bs.push_back(building("s", "b" + std::to_string(i), {1.0, 2.0}));
        bs[3].days[1].value.reset();
        const auto samples = collect_site_samples(bs);
        REQUIRE(samples.size() == 2);
        CHECK(samples[0].values.size() == 5);
        CHECK(samples[1].values.size() == 4);
        CHECK(samples[1].building_id.empty());
    }

    TEST_CASE("single building gives samples of at most one value") {
        const std::vector<BuildingDaily> bs{building("s", "only", {1.0, std::nullopt, 3.0})};
        const auto samples = collect_site_samples(bs);
        REQUIRE(samples.size() == 3);
        for (const auto& s : samples) CHECK(s.values.size() <= 1);
        CHECK(samples[1].values.empty());
    }

    TEST_CASE("sites are keyed independently") {
        const std::vector<BuildingDaily> bs{building("z", "a", {1.0}), building("a", "b", {2.0}),
                                            building("z", "c", {3.0})};
        const auto samples = collect_site_samples(bs);
        REQUIRE(samples.size() == 2);
        CHECK(samples[0].site_id == "a");
        CHECK(samples[0].values == std::vector<double>{2.0});
        CHECK(samples[1].site_id == "z");
        CHECK(samples[1].values.size() == 2);
    }

    TEST_CASE("per-building samples") {
        const std::vector<BuildingDaily> bs{building("s", "b2", {1.0, 2.0}), building("s", "b1", {3.0, 4.0})};
        const auto samples = collect_building_samples(bs);
        REQUIRE(samples.size() == 4);
        CHECK(samples[0].building_id == "b1");
        CHECK(samples[0].values == std::vector<double>{3.0});
        CHECK(samples[3].building_id == "b2");
    }
}
