#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace remfl {

/// One-dimensional Gaussian mixture with a single standard deviation shared
/// by all components. Means are kept sorted ascending and weights follow the
/// same permutation, so models from different fits can be combined
/// component-by-component.
struct GmmParams {
    std::vector<double> means;    // sorted ascending
    std::vector<double> weights;  // non-negative, sum to 1
    double sigma = 1.0;           // shared standard deviation, > 0

    int n_components() const { return static_cast<int>(means.size()); }
};

/// Throws std::invalid_argument when invariants are violated (size mismatch,
/// unsorted means, weights off the simplex by more than 1e-9, sigma <= 0).
void validate(const GmmParams& params);

struct EmOptions {
    double tolerance = 1e-6;   // relative log-likelihood change to stop
    int max_iterations = 200;  // per restart
    int restarts = 3;          // independent seedings, best likelihood kept
    std::uint64_t seed = 0;    // drives initialization and restarts
    /// When > 0 and the sample count exceeds it, the fit runs on a weighted
    /// histogram of this many bins (bin representative = within-bin mean).
    /// Exact per-sample EM when 0.
    int quantize_bins = 0;
    double variance_floor_scale = 1e-6;  // sigma floor relative to data range
};

/// Per-iteration log-likelihood trace of the restart that won.
struct EmTrace {
    std::vector<double> log_likelihoods;
    int iterations = 0;
};

/// Maximum-likelihood fit via expectation-maximization. Requires
/// samples.size() >= 2 * n_components. Component collapse is prevented by the
/// variance floor and an empty-component re-seed, never by failure.
GmmParams fit_em(std::span<const double> samples, int n_components,
                 const EmOptions& opts = {}, EmTrace* trace = nullptr);

/// Sum over samples of ln p(x); log-sum-exp stabilized.
double log_likelihood(const GmmParams& params, std::span<const double> samples);

/// Akaike information criterion with 2J parameters: J means, J-1 free
/// weights, one shared variance.
double aic(const GmmParams& params, std::span<const double> samples);

/// Fits J = 1..j_max and returns the J where the relative AIC improvement
/// first drops below plateau_rel (the last J before the plateau); falls back
/// to the AIC argmin when no plateau appears.
int select_j(std::span<const double> samples, int j_max, const EmOptions& opts = {},
             double plateau_rel = 0.005);

double pdf(const GmmParams& params, double x);

/// P(X < t); mixture of normal CDFs.
double cdf(const GmmParams& params, double t);

/// n i.i.d. draws: component chosen by weight, then a normal draw.
std::vector<double> sample(const GmmParams& params, int n, std::uint64_t seed);

/// Sorts means ascending carrying weights along; ties keep original order.
GmmParams sort_components(const GmmParams& params);

/// Flat JSON object {"J":..,"sigma":..,"means":[..],"weights":[..]}.
std::string to_json(const GmmParams& params);
GmmParams gmm_from_json(const std::string& text);

}  // namespace remfl
