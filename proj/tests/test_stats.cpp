#include <doctest.h>

#include "aldi/stats.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace aldi::stats;
using aldi::testing::enumerated_ks;

namespace {

std::vector<double> normal_sample(std::mt19937_64& rng, std::size_t n, double mean, double sd) {
    std::normal_distribution<double> d(mean, sd);
    std::vector<double> out(n);
    for (auto& v : out) v = d(rng);
    return out;
}

double log_normal_pdf(double x, double mean, double var) {
    return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * (x - mean) * (x - mean) / var;
}

} // namespace

TEST_SUITE("kolmogorov") {
    TEST_CASE("survival function reference values") {
        // Kolmogorov distribution upper tail, independently tabulated
        const std::pair<double, double> table[] = {
            {0.3, 0.9999906941986655},  {0.5, 0.9639452436648751},   {0.8, 0.5441424115741981},
            {1.0, 0.26999967167735456}, {1.17, 0.12939004218561884}, {1.18, 0.1234538094297657},
            {1.5, 0.022217962616525127}, {2.0, 0.0006709252557796953}, {3.0, 3.045995948942526e-08},
        };
        for (const auto& [lambda, q] : table) {
            CAPTURE(lambda);
            CHECK(kolmogorov_survival(lambda) == doctest::Approx(q).epsilon(1e-10));
        }
    }

    TEST_CASE("limits and clamping") {
        CHECK(kolmogorov_survival(0.0) == 1.0);
        CHECK(kolmogorov_survival(1e-3) == 1.0);
        CHECK(kolmogorov_survival(50.0) == 0.0);
        for (double l = 0.0; l < 4.0; l += 0.01) {
            const double q = kolmogorov_survival(l);
            CHECK(q >= 0.0);
            CHECK(q <= 1.0);
            CHECK(kolmogorov_survival(l + 0.01) <= q);
        }
    }
}

TEST_SUITE("ks_two_sample") {
    TEST_CASE("identical samples") {
        const std::vector<double> a{1, 5, 2, 2, 9};
        const auto r = ks_two_sample(a, a);
        CHECK(r.d_value == 0.0);
        CHECK(r.p_value == 1.0);
        CHECK(r.n1 == 5);
        CHECK(r.n2 == 5);
    }

    TEST_CASE("disjoint supports") {
        const std::vector<double> a{0, 0, 0};
        const std::vector<double> b{1, 1, 1};
        CHECK(ks_two_sample(a, b).d_value == 1.0);
    }

    TEST_CASE("overlapping ramps") {
        const std::vector<double> a{1, 2, 3, 4};
        const std::vector<double> b{3, 4, 5, 6};
        const auto r = ks_two_sample(a, b);
        CHECK(r.d_value == 0.5);
        // n_e = 2, lambda = (sqrt 2 + 0.12 + 0.11 / sqrt 2) * 0.5
        CHECK(r.p_value == doctest::Approx(0.5344157192165071).epsilon(1e-10));
    }

    TEST_CASE("hand-enumerated fixtures") {
        struct Fixture {
            std::vector<double> a;
            std::vector<double> b;
            double d;
        };
        const std::vector<Fixture> fixtures{
            {{1}, {2}, 1.0},
            {{1, 2}, {1, 2}, 0.0},
            {{1, 2}, {2, 3}, 0.5},
            {{1, 2, 3}, {2}, 1.0 / 3.0},
            {{0, 1, 2, 3}, {1.5}, 0.5},
            {{1, 1, 1, 2}, {1, 2, 2, 2}, 0.5},
            {{5, 1, 3}, {2, 4, 6}, 1.0 / 3.0},
            {{1, 2, 3, 4, 5}, {3}, 0.4},
            {{0.1, 0.2}, {0.3, 0.4, 0.5}, 1.0},
            {{1, 2, 3, 4}, {2, 2, 2, 2}, 0.5},
            {{-1, 0, 1}, {-1, 0, 1, 10}, 0.25},
            {{3, 3, 3}, {3, 3}, 0.0},
        };
        for (const auto& f : fixtures) {
            const double d = ks_two_sample(f.a, f.b).d_value;
            CHECK(d == doctest::Approx(f.d).epsilon(1e-15));
            CHECK(d == doctest::Approx(enumerated_ks(f.a, f.b)).epsilon(1e-15));
        }
    }

    TEST_CASE("property: merge scan agrees with enumeration, is symmetric and rank based") {
        std::mt19937_64 rng(42);
        std::uniform_int_distribution<int> size(1, 30);
        std::uniform_int_distribution<int> value(0, 12); // coarse values force ties
        for (int trial = 0; trial < 300; ++trial) {
            std::vector<double> a(static_cast<std::size_t>(size(rng)));
            std::vector<double> b(static_cast<std::size_t>(size(rng)));
            for (auto& v : a) v = value(rng) * 0.5;
            for (auto& v : b) v = value(rng) * 0.5;
            const auto ab = ks_two_sample(a, b);
            const auto ba = ks_two_sample(b, a);
            CHECK(ab.d_value == doctest::Approx(enumerated_ks(a, b)).epsilon(1e-14));
            CHECK(ab.d_value == ba.d_value);
            CHECK(ab.p_value == ba.p_value);
            CHECK(ab.d_value >= 0.0);
            CHECK(ab.d_value <= 1.0);
            CHECK(ab.p_value >= 0.0);
            CHECK(ab.p_value <= 1.0);

            std::vector<double> ta(a.size());
            std::vector<double> tb(b.size());
            auto f = [](double x) { return std::exp(x) * 3.0 - 7.0; };
            std::transform(a.begin(), a.end(), ta.begin(), f);
            std::transform(b.begin(), b.end(), tb.begin(), f);
            const auto t = ks_two_sample(ta, tb);
            CHECK(t.d_value == ab.d_value);
            CHECK(t.p_value == ab.p_value);
        }
    }

    TEST_CASE("p-values are roughly uniform under the null") {
        std::mt19937_64 rng(2024);
        int small = 0;
        const int pairs = 200;
        for (int i = 0; i < pairs; ++i) {
            const auto a = normal_sample(rng, 200, 0.0, 1.0);
            const auto b = normal_sample(rng, 200, 0.0, 1.0);
            small += ks_two_sample(a, b).p_value < 0.05 ? 1 : 0;
        }
        const double frac = static_cast<double>(small) / pairs;
        CHECK(frac >= 0.01);
        CHECK(frac <= 0.12);
    }

    TEST_CASE("empty sample throws") {
        const std::vector<double> a{1.0};
        const std::vector<double> none;
        CHECK_THROWS_AS((void)ks_two_sample(a, none), std::invalid_argument);
        CHECK_THROWS_AS((void)ks_two_sample(none, a), std::invalid_argument);
    }
}

TEST_SUITE("fit_gmm") {
    TEST_CASE("two separated clusters") {
        std::mt19937_64 rng(17);
        auto data = normal_sample(rng, 100, 0.1, 0.03);
        const auto hi = normal_sample(rng, 100, 0.9, 0.03);
        data.insert(data.end(), hi.begin(), hi.end());
        const auto g = fit_gmm(data, 2);
        REQUIRE(g.size() == 2);
        CHECK(std::abs(g.components[0].mean - 0.1) < 0.05);
        CHECK(std::abs(g.components[1].mean - 0.9) < 0.05);
        CHECK(std::abs(g.components[0].weight - 0.5) < 0.1);
        CHECK(std::abs(g.components[1].weight - 0.5) < 0.1);
        CHECK(g.converged);

        // the fitted means coincide with the cluster sample means
        const double m0 = std::accumulate(data.begin(), data.begin() + 100, 0.0) / 100.0;
        const double m1 = std::accumulate(data.begin() + 100, data.end(), 0.0) / 100.0;
        CHECK(g.components[0].mean == doctest::Approx(m0).epsilon(1e-6));
        CHECK(g.components[1].mean == doctest::Approx(m1).epsilon(1e-6));
        CHECK(g.max_mean() == g.components[1].mean);
    }

    TEST_CASE("single component is the closed-form fit") {
        const std::vector<double> data{0.2, 0.5, 0.9, 0.4, 0.4, 0.75};
        const auto g = fit_gmm(data, 1);
        const double mean = std::accumulate(data.begin(), data.end(), 0.0) / 6.0;
        double var = 0.0;
        for (double v : data) var += (v - mean) * (v - mean);
        var /= 6.0;
        CHECK(g.components[0].weight == 1.0);
        CHECK(std::abs(g.components[0].mean - mean) <= 1e-9);
        CHECK(std::abs(g.components[0].variance - var) <= 1e-9);
    }

    TEST_CASE("property: invariants across random inputs") {
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            CAPTURE(seed);
            std::mt19937_64 rng(seed);
            const std::size_t n = 20 + rng() % 300;
            const std::size_t k = 1 + rng() % 7;
            std::vector<double> data;
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double centre = static_cast<double>(rng() % 4) * 0.25;
                data.push_back(std::clamp(centre + 0.05 * u(rng) * u(rng), 0.0, 1.0));
            }
            if (seed % 5 == 0) {
                for (std::size_t i = 0; i < n / 2; ++i) data[i] = 0.125; // heavy ties
            }
            const auto g = fit_gmm(data, k, seed);
            REQUIRE(g.size() == k);

            double wsum = 0.0;
            for (const auto& c : g.components) {
                wsum += c.weight;
                CHECK(c.weight > 0.0);
                CHECK(c.variance >= g.variance_floor);
            }
            CHECK(std::abs(wsum - 1.0) <= 1e-9);
            for (std::size_t c = 1; c < k; ++c) CHECK(g.components[c - 1].mean <= g.components[c].mean);
            for (std::size_t t = 1; t < g.log_likelihood_trace.size(); ++t) {
                CHECK(g.log_likelihood_trace[t] >= g.log_likelihood_trace[t - 1] - 1e-7);
            }
            CHECK(g.iterations <= 500);
            for (double x : data) {
                const auto post = g.posterior(x);
                CHECK(std::abs(std::accumulate(post.begin(), post.end(), 0.0) - 1.0) <= 1e-9);
            }
            const auto again = fit_gmm(data, k, seed);
            for (std::size_t c = 0; c < k; ++c) {
                CHECK(again.components[c].mean == g.components[c].mean);
                CHECK(again.components[c].variance == g.components[c].variance);
                CHECK(again.components[c].weight == g.components[c].weight);
            }
            CHECK(again.log_likelihood_trace == g.log_likelihood_trace);
        }
    }

    TEST_CASE("all data identical collapses onto one component") {
        const std::vector<double> data(30, 0.4);
        const auto g = fit_gmm(data, 3);
        CHECK(g.components[0].mean == doctest::Approx(0.4));
        CHECK(g.components[0].weight == doctest::Approx(1.0 - 2e-4));
        CHECK(g.components[1].weight == doctest::Approx(1e-4));
        CHECK(g.components[2].weight == doctest::Approx(1e-4));
        CHECK(g.components[0].variance == g.variance_floor);
    }

    TEST_CASE("collapsed components stay at the weight floor") {
        // five clusters of very different mass for seven components
        std::mt19937_64 rng(3);
        std::vector<double> data;
        for (int i = 0; i < 300; ++i) data.push_back(0.05 + 0.001 * static_cast<double>(rng() % 10));
        for (int i = 0; i < 3; ++i) data.push_back(0.95);
        const auto g = fit_gmm(data, 7);
        double wsum = 0.0;
        for (const auto& c : g.components) {
            CHECK(c.weight >= 1e-4 * (1.0 - 1e-12));
            wsum += c.weight;
        }
        CHECK(std::abs(wsum - 1.0) <= 1e-9);
    }

    TEST_CASE("errors") {
        const std::vector<double> two{0.1, 0.2};
        CHECK_THROWS_AS((void)fit_gmm(two, 3), std::invalid_argument);
        CHECK_THROWS_AS((void)fit_gmm(two, 0), std::invalid_argument);
        const std::vector<double> bad{0.1, std::nan(""), 0.3};
        CHECK_THROWS_AS((void)fit_gmm(bad, 1), std::invalid_argument);
    }
}

TEST_SUITE("responsibility") {
    GaussianMixture1D mixture(std::vector<GaussianComponent> comps) {
        GaussianMixture1D g;
        g.components = std::move(comps);
        return g;
    }

    TEST_CASE("dominant component at its own mean") {
        const auto g = mixture({{0.5, 0.1, 0.001}, {0.5, 0.9, 0.001}});
        CHECK(responsibility(g, 0.1) == 0);
        CHECK(responsibility(g, 0.9) == 1);
    }

    TEST_CASE("exact tie goes to the lower mean") {
        const auto g = mixture({{0.5, 0.25, 0.01}, {0.5, 0.75, 0.01}});
        CHECK(responsibility(g, 0.5) == 0);
    }

    TEST_CASE("far right tail is decided in log space") {
        const auto g = mixture({{0.6, 0.1, 0.0004}, {0.3, 0.5, 0.0009}, {0.1, 0.6, 0.0001}});
        for (double x : {3.0, 10.0, 80.0}) {
            // every density underflows to zero in linear space here
            std::size_t best = 0;
            double best_lp = -INFINITY;
            for (std::size_t c = 0; c < 3; ++c) {
                const auto& comp = g.components[c];
                const double lp = std::log(comp.weight) + log_normal_pdf(x, comp.mean, comp.variance);
                if (lp > best_lp) {
                    best_lp = lp;
                    best = c;
                }
            }
            CAPTURE(x);
            CHECK(responsibility(g, x) == best);
            CHECK(best == 1);
            const auto lj = g.log_joint(x);
            CHECK(lj[1] == doctest::Approx(best_lp).epsilon(1e-12));
        }
    }
}
