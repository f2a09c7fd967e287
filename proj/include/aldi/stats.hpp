#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aldi::stats {

struct KSResult {
    double d_value = 0.0; ///< sup |ECDF_a - ECDF_b|
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

/// Kolmogorov survival function Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2),
/// clamped to [0, 1].
[[nodiscard]] double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
/// Throws std::invalid_argument if either sample is empty.
[[nodiscard]] KSResult ks_two_sample(std::span<const double> sample_a, std::span<const double> sample_b);

struct GaussianComponent {
    double weight = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

/// Univariate Gaussian mixture. Components are kept sorted by ascending mean.
struct GaussianMixture1D {
    std::vector<GaussianComponent> components;
    std::vector<double> log_likelihood_trace;
    double variance_floor = 0.0;
    std::size_t iterations = 0;
    bool converged = false;

    [[nodiscard]] std::size_t size() const { return components.size(); }
    [[nodiscard]] double max_mean() const;
    /// log(w_c) + log N(x; mu_c, sigma_c^2) for every component.
    [[nodiscard]] std::vector<double> log_joint(double x) const;
    /// Posterior membership probabilities at x; they sum to 1.
    [[nodiscard]] std::vector<double> posterior(double x) const;
    [[nodiscard]] double log_likelihood(std::span<const double> data) const;
};

struct EmOptions {
    std::size_t max_iterations = 500;
    double tolerance = 1e-6;      ///< stop when the log-likelihood gains less than this
    double collapse_weight = 1e-4; ///< components below this weight are frozen here
};

/// Fits a mixture by EM from quantile-placed means. `seed` only drives the
/// tiny jitter that separates initial means landing on the same value, so the
/// result is a pure function of (data, n_components, seed).
/// Throws std::invalid_argument when data.size() < n_components, n_components
/// is zero or data holds a non-finite value.
[[nodiscard]] GaussianMixture1D fit_gmm(std::span<const double> data, std::size_t n_components,
                                        std::uint64_t seed = 0, const EmOptions& options = {});

/// Index of the component maximising w_c N(x; mu_c, sigma_c^2); ties go to the
/// lower (lower-mean) index.
[[nodiscard]] std::size_t responsibility(const GaussianMixture1D& gmm, double x);

} // namespace aldi::stats
