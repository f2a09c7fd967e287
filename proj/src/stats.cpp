#include "aldi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace aldi::stats {

namespace {

constexpr double kSeriesCutoff = 1e-12;
// Below this lambda the alternating series converges too slowly; the
// equivalent Jacobi theta form of the same distribution is summed instead.
constexpr double kThetaFormBelow = 1.18;

double log_normal_pdf(double x, double mean, double variance) {
    const double diff = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + diff * diff / variance);
}

double log_sum_exp(std::span<const double> v) {
    const double hi = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(hi)) {
        return hi;
    }
    double acc = 0.0;
    for (double x : v) {
        acc += std::exp(x - hi);
    }
    return hi + std::log(acc);
}

double quantile_sorted(std::span<const double> sorted, double q) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

void sort_by_mean(std::vector<GaussianComponent>& components) {
    std::stable_sort(components.begin(), components.end(),
                     [](const GaussianComponent& a, const GaussianComponent& b) { return a.mean < b.mean; });
}

} // namespace

double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) {
        return 1.0;
    }
    double q = 0.0;
    if (lambda < kThetaFormBelow) {
        // CDF K(l) = sqrt(2 pi) / l * sum_{j>=1} exp(-(2j-1)^2 pi^2 / (8 l^2))
        const double pi2_8l2 = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int j = 1; j < 100; ++j) {
            const double k = 2.0 * j - 1.0;
            const double term = std::exp(-k * k * pi2_8l2);
            sum += term;
            if (term < kSeriesCutoff * sum || term == 0.0) {
                break;
            }
        }
        q = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
    } else {
        const double a2 = -2.0 * lambda * lambda;
        double sign = 1.0;
        for (int j = 1; j < 100; ++j) {
            const double term = std::exp(a2 * j * j);
            q += sign * term;
            if (term < kSeriesCutoff) {
                break;
            }
            sign = -sign;
        }
        q *= 2.0;
    }
    return std::clamp(q, 0.0, 1.0);
}

KSResult ks_two_sample(std::span<const double> sample_a, std::span<const double> sample_b) {
    if (sample_a.empty() || sample_b.empty()) {
        throw std::invalid_argument("ks_two_sample: both samples must be non-empty");
    }
    std::vector<double> a(sample_a.begin(), sample_a.end());
    std::vector<double> b(sample_b.begin(), sample_b.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    const auto n1 = static_cast<double>(a.size());
    const auto n2 = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }

    KSResult r;
    r.n1 = a.size();
    r.n2 = b.size();
    r.d_value = std::clamp(d, 0.0, 1.0);
    const double ne = n1 * n2 / (n1 + n2);
    const double root = std::sqrt(ne);
    r.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * r.d_value);
    return r;
}

double GaussianMixture1D::max_mean() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : components) {
        hi = std::max(hi, c.mean);
    }
    return hi;
}

std::vector<double> GaussianMixture1D::log_joint(double x) const {
    std::vector<double> out(components.size());
    for (std::size_t c = 0; c < components.size(); ++c) {
        const auto& comp = components[c];
        out[c] = std::log(comp.weight) + log_normal_pdf(x, comp.mean, comp.variance);
    }
    return out;
}

std::vector<double> GaussianMixture1D::posterior(double x) const {
    auto lj = log_joint(x);
    const double norm = log_sum_exp(lj);
    for (double& v : lj) {
        v = std::exp(v - norm);
    }
    return lj;
}

double GaussianMixture1D::log_likelihood(std::span<const double> data) const {
    double total = 0.0;
    for (double x : data) {
        total += log_sum_exp(log_joint(x));
    }
    return total;
}

GaussianMixture1D fit_gmm(std::span<const double> data, std::size_t n_components, std::uint64_t seed,
                          const EmOptions& options) {
    if (n_components == 0) {
        throw std::invalid_argument("fit_gmm: need at least one component");
    }
    if (data.size() < n_components) {
        throw std::invalid_argument("fit_gmm: " + std::to_string(data.size()) + " points cannot support " +
                                    std::to_string(n_components) + " components");
    }
    for (double x : data) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("fit_gmm: data must be finite");
        }
    }

    const std::size_t n = data.size();
    const std::size_t k = n_components;
    const auto nd = static_cast<double>(n);
    const double mean = std::accumulate(data.begin(), data.end(), 0.0) / nd;
    double variance = 0.0;
    for (double x : data) {
        variance += (x - mean) * (x - mean);
    }
    variance /= nd;

    GaussianMixture1D gmm;
    gmm.variance_floor = std::max(1e-6, 1e-3 * variance);
    const double eps_w = options.collapse_weight;

    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());

    if (sorted.front() == sorted.back()) {
        // One effective component; the rest sit at the collapse weight.
        gmm.components.assign(k, GaussianComponent{eps_w, mean, gmm.variance_floor});
        gmm.components[0].weight = 1.0 - eps_w * static_cast<double>(k - 1);
        gmm.log_likelihood_trace.push_back(gmm.log_likelihood(data));
        gmm.converged = true;
        return gmm;
    }

    gmm.components.resize(k);
    const double init_var = std::max(variance / static_cast<double>(k), gmm.variance_floor);
    for (std::size_t c = 0; c < k; ++c) {
        const double q = (static_cast<double>(c) + 0.5) / static_cast<double>(k);
        gmm.components[c] = GaussianComponent{1.0 / static_cast<double>(k), quantile_sorted(sorted, q), init_var};
    }
    // Coincident starting means would stay coincident forever under EM.
    std::mt19937_64 gen(seed);
    const double jitter = 1e-3 * std::sqrt(variance);
    for (std::size_t c = 1; c < k; ++c) {
        for (std::size_t prev = 0; prev < c; ++prev) {
            if (gmm.components[c].mean == gmm.components[prev].mean) {
                gmm.components[c].mean += jitter * (static_cast<double>(c) + unit_uniform(gen));
                break;
            }
        }
    }

    std::vector<bool> frozen(k, false);
    std::vector<double> resp(n * k);
    std::vector<double> lj(k);
    std::vector<double> mass(k);

    for (std::size_t iter = 0; iter <= options.max_iterations; ++iter) {
        // E-step
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < k; ++c) {
                const auto& comp = gmm.components[c];
                lj[c] = std::log(comp.weight) + log_normal_pdf(data[i], comp.mean, comp.variance);
            }
            const double norm = log_sum_exp(lj);
            ll += norm;
            for (std::size_t c = 0; c < k; ++c) {
                resp[i * k + c] = std::exp(lj[c] - norm);
            }
        }
        gmm.log_likelihood_trace.push_back(ll);
        gmm.iterations = iter;
        const auto& trace = gmm.log_likelihood_trace;
        if (trace.size() >= 2 && trace[trace.size() - 1] - trace[trace.size() - 2] < options.tolerance) {
            gmm.converged = true;
            break;
        }
        if (iter == options.max_iterations) {
            break;
        }

        // M-step
        std::fill(mass.begin(), mass.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < k; ++c) {
                mass[c] += resp[i * k + c];
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (frozen[c] || mass[c] / nd < eps_w) {
                frozen[c] = true;
                continue;
            }
            double mu = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                mu += resp[i * k + c] * data[i];
            }
            mu /= mass[c];
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double diff = data[i] - mu;
                var += resp[i * k + c] * diff * diff;
            }
            var /= mass[c];
            gmm.components[c].mean = mu;
            gmm.components[c].variance = std::max(var, gmm.variance_floor);
        }
        // Frozen components hold eps_w; the remainder is shared in proportion to
        // mass. Sharing can push another component under eps_w, so repeat.
        bool changed = true;
        while (changed) {
            changed = false;
            double active_mass = 0.0;
            std::size_t n_frozen = 0;
            for (std::size_t c = 0; c < k; ++c) {
                if (frozen[c]) {
                    ++n_frozen;
                } else {
                    active_mass += mass[c];
                }
            }
            const double share = 1.0 - eps_w * static_cast<double>(n_frozen);
            for (std::size_t c = 0; c < k; ++c) {
                if (frozen[c]) {
                    gmm.components[c].weight = eps_w;
                    continue;
                }
                gmm.components[c].weight = share * mass[c] / active_mass;
                if (gmm.components[c].weight < eps_w) {
                    frozen[c] = true;
                    changed = true;
                }
            }
        }
    }

    sort_by_mean(gmm.components);
    return gmm;
}

std::size_t responsibility(const GaussianMixture1D& gmm, double x) {
    const auto lj = gmm.log_joint(x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < lj.size(); ++c) {
        if (lj[c] > lj[best]) {
            best = c;
        }
    }
    return best;
}

} // namespace aldi::stats
