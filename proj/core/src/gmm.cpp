#include "remfl/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "remfl/rng.hpp"

namespace remfl {

namespace {

constexpr double kHalfLog2Pi = 0.918938533204672742;  // 0.5 * ln(2*pi)
constexpr double kEmptyComponentWeight = 1e-6;

/// Centered, optionally histogram-compressed sample set for the EM loop.
struct WeightedData {
    std::vector<double> value;
    std::vector<double> weight;
    double total_weight = 0.0;
    double sum_sq = 0.0;  // sum of w * v^2 over centered values
    double offset = 0.0;  // mean subtracted from the raw samples
    double range = 0.0;
};

WeightedData prepare_data(std::span<const double> samples, int bins) {
    WeightedData d;
    const std::size_t n = samples.size();
    double mean = 0.0;
    for (double x : samples) {
        if (!std::isfinite(x)) throw std::invalid_argument("fit_em: non-finite sample");
        mean += x;
    }
    mean /= static_cast<double>(n);
    d.offset = mean;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double x : samples) {
        lo = std::min(lo, x - mean);
        hi = std::max(hi, x - mean);
    }
    d.range = hi - lo;

    if (bins > 0 && n > static_cast<std::size_t>(bins) && d.range > 0.0) {
        std::vector<double> count(bins, 0.0), sum(bins, 0.0);
        const double inv_width = bins / d.range;
        for (double x : samples) {
            const double v = x - mean;
            int b = static_cast<int>((v - lo) * inv_width);
            b = std::clamp(b, 0, bins - 1);
            count[b] += 1.0;
            sum[b] += v;
        }
        for (int b = 0; b < bins; ++b) {
            if (count[b] == 0.0) continue;
            d.value.push_back(sum[b] / count[b]);
            d.weight.push_back(count[b]);
        }
    } else {
        d.value.reserve(n);
        for (double x : samples) d.value.push_back(x - mean);
        d.weight.assign(n, 1.0);
    }

    d.total_weight = static_cast<double>(n);
    for (std::size_t b = 0; b < d.value.size(); ++b)
        d.sum_sq += d.weight[b] * d.value[b] * d.value[b];
    return d;
}

std::size_t pick_weighted(std::span<const double> w, double total, Rng& rng) {
    double target = rng.uniform() * total;
    for (std::size_t i = 0; i < w.size(); ++i) {
        target -= w[i];
        if (target < 0.0) return i;
    }
    return w.size() - 1;
}

/// k-means++ seeding on the weighted points, then pooled hard-assignment
/// variance and uniform weights.
void init_params(const WeightedData& d, int j, double sigma_floor, Rng& rng,
                 std::vector<double>& means, std::vector<double>& weights, double& sigma) {
    const std::size_t b_count = d.value.size();
    means.clear();
    means.push_back(d.value[pick_weighted(d.weight, d.total_weight, rng)]);

    std::vector<double> dist_sq(b_count);
    double dist_total = 0.0;
    for (std::size_t b = 0; b < b_count; ++b) {
        const double diff = d.value[b] - means[0];
        dist_sq[b] = d.weight[b] * diff * diff;
        dist_total += dist_sq[b];
    }
    while (static_cast<int>(means.size()) < j) {
        double next;
        if (dist_total > 0.0) {
            next = d.value[pick_weighted(dist_sq, dist_total, rng)];
        } else {
            next = d.value[pick_weighted(d.weight, d.total_weight, rng)];
        }
        means.push_back(next);
        dist_total = 0.0;
        for (std::size_t b = 0; b < b_count; ++b) {
            const double diff = d.value[b] - next;
            dist_sq[b] = std::min(dist_sq[b], d.weight[b] * diff * diff);
            dist_total += dist_sq[b];
        }
    }

    double pooled = 0.0;
    for (std::size_t b = 0; b < b_count; ++b) {
        double best = std::numeric_limits<double>::infinity();
        for (double m : means) best = std::min(best, (d.value[b] - m) * (d.value[b] - m));
        pooled += d.weight[b] * best;
    }
    sigma = std::max(std::sqrt(pooled / d.total_weight), sigma_floor);
    weights.assign(j, 1.0 / j);
}

struct EmRun {
    std::vector<double> means;
    std::vector<double> weights;
    double sigma = 0.0;
    double final_ll = -std::numeric_limits<double>::infinity();
    std::vector<double> ll_trace;
    int iterations = 0;
};

EmRun run_em(const WeightedData& d, int j, const EmOptions& opts, double sigma_floor, Rng& rng) {
    EmRun run;
    init_params(d, j, sigma_floor, rng, run.means, run.weights, run.sigma);

    const std::size_t b_count = d.value.size();
    std::vector<double> log_w(j), resp(j), occupancy(j), first_moment(j);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        for (int c = 0; c < j; ++c)
            log_w[c] = std::log(std::max(run.weights[c], 1e-300));
        const double inv_two_var = 1.0 / (2.0 * run.sigma * run.sigma);
        const double log_sigma = std::log(run.sigma);

        std::fill(occupancy.begin(), occupancy.end(), 0.0);
        std::fill(first_moment.begin(), first_moment.end(), 0.0);
        double ll = 0.0;
        double worst_density = std::numeric_limits<double>::infinity();
        std::size_t worst_index = 0;

        for (std::size_t b = 0; b < b_count; ++b) {
            const double v = d.value[b];
            double top = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < j; ++c) {
                const double diff = v - run.means[c];
                resp[c] = log_w[c] - diff * diff * inv_two_var;
                top = std::max(top, resp[c]);
            }
            double norm = 0.0;
            for (int c = 0; c < j; ++c) {
                resp[c] = std::exp(resp[c] - top);
                norm += resp[c];
            }
            const double log_density = top + std::log(norm) - log_sigma - kHalfLog2Pi;
            ll += d.weight[b] * log_density;
            if (log_density < worst_density) {
                worst_density = log_density;
                worst_index = b;
            }
            const double scale = d.weight[b] / norm;
            for (int c = 0; c < j; ++c) {
                const double g = scale * resp[c];
                occupancy[c] += g;
                first_moment[c] += g * v;
            }
        }

        run.ll_trace.push_back(ll);
        run.iterations = iter + 1;

        double mean_sq = 0.0;
        for (int c = 0; c < j; ++c) {
            if (occupancy[c] > 0.0) run.means[c] = first_moment[c] / occupancy[c];
            run.weights[c] = occupancy[c] / d.total_weight;
            mean_sq += occupancy[c] * run.means[c] * run.means[c];
        }
        run.sigma = std::max(std::sqrt(std::max(d.sum_sq - mean_sq, 0.0) / d.total_weight),
                             sigma_floor);

        // Re-seed components that lost all their mass at the point the model
        // explains worst; skip the convergence check for that iteration.
        bool rescued = false;
        for (int c = 0; c < j; ++c) {
            if (run.weights[c] < kEmptyComponentWeight) {
                run.means[c] = d.value[worst_index];
                run.weights[c] = 1.0 / d.total_weight;
                rescued = true;
            }
        }
        if (rescued) {
            double sum = std::accumulate(run.weights.begin(), run.weights.end(), 0.0);
            for (double& w : run.weights) w /= sum;
            prev_ll = ll;
            continue;
        }

        if (iter > 0) {
            const double change = std::fabs(ll - prev_ll) / (std::fabs(prev_ll) + 1e-12);
            if (change < opts.tolerance) {
                run.final_ll = ll;
                return run;
            }
        }
        prev_ll = ll;
    }
    run.final_ll = prev_ll;
    return run;
}

}  // namespace

void validate(const GmmParams& params) {
    const std::size_t j = params.means.size();
    if (j == 0) throw std::invalid_argument("GmmParams: no components");
    if (params.weights.size() != j)
        throw std::invalid_argument("GmmParams: means/weights size mismatch");
    if (!(params.sigma > 0.0) || !std::isfinite(params.sigma))
        throw std::invalid_argument("GmmParams: sigma must be positive and finite");
    double sum = 0.0;
    for (std::size_t c = 0; c < j; ++c) {
        if (!std::isfinite(params.means[c]))
            throw std::invalid_argument("GmmParams: non-finite mean");
        if (params.weights[c] < 0.0)
            throw std::invalid_argument("GmmParams: negative weight");
        if (c > 0 && params.means[c] < params.means[c - 1])
            throw std::invalid_argument("GmmParams: means not sorted ascending");
        sum += params.weights[c];
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("GmmParams: weights do not sum to 1");
}

GmmParams fit_em(std::span<const double> samples, int n_components, const EmOptions& opts,
                 EmTrace* trace) {
    if (n_components < 1) throw std::invalid_argument("fit_em: n_components must be >= 1");
    if (samples.size() < 2 * static_cast<std::size_t>(n_components))
        throw std::invalid_argument("fit_em: need at least 2*J samples");

    const WeightedData data = prepare_data(samples, opts.quantize_bins);
    double sigma_floor = opts.variance_floor_scale * data.range;
    if (sigma_floor <= 0.0)
        sigma_floor = 1e-12 * std::max(1.0, std::fabs(data.offset));

    EmRun best;
    const int restarts = std::max(opts.restarts, 1);
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(opts.seed, {0x67e6u, static_cast<std::uint64_t>(r)}));
        EmRun run = run_em(data, n_components, opts, sigma_floor, rng);
        if (run.final_ll > best.final_ll || r == 0) best = std::move(run);
    }

    GmmParams params;
    params.sigma = best.sigma;
    params.means = std::move(best.means);
    params.weights = std::move(best.weights);
    for (double& m : params.means) m += data.offset;
    params = sort_components(params);
    if (trace) {
        trace->log_likelihoods = std::move(best.ll_trace);
        trace->iterations = best.iterations;
    }
    return params;
}

double log_likelihood(const GmmParams& params, std::span<const double> samples) {
    const int j = params.n_components();
    std::vector<double> log_w(j);
    for (int c = 0; c < j; ++c) log_w[c] = std::log(std::max(params.weights[c], 1e-300));
    const double inv_two_var = 1.0 / (2.0 * params.sigma * params.sigma);
    const double log_norm = std::log(params.sigma) + kHalfLog2Pi;

    double ll = 0.0;
    for (double x : samples) {
        double top = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < j; ++c) {
            const double diff = x - params.means[c];
            top = std::max(top, log_w[c] - diff * diff * inv_two_var);
        }
        double acc = 0.0;
        for (int c = 0; c < j; ++c) {
            const double diff = x - params.means[c];
            acc += std::exp(log_w[c] - diff * diff * inv_two_var - top);
        }
        ll += top + std::log(acc) - log_norm;
    }
    return ll;
}

double aic(const GmmParams& params, std::span<const double> samples) {
    const double p = 2.0 * params.n_components();
    return 2.0 * p - 2.0 * log_likelihood(params, samples);
}

int select_j(std::span<const double> samples, int j_max, const EmOptions& opts,
             double plateau_rel) {
    if (j_max < 1) throw std::invalid_argument("select_j: j_max must be >= 1");
    std::vector<double> scores;
    scores.reserve(j_max);
    for (int j = 1; j <= j_max; ++j) {
        EmOptions o = opts;
        o.seed = derive_seed(opts.seed, {0x5e1u, static_cast<std::uint64_t>(j)});
        scores.push_back(aic(fit_em(samples, j, o), samples));
    }
    for (int j = 2; j <= j_max; ++j) {
        const double improvement = scores[j - 2] - scores[j - 1];
        if (improvement < plateau_rel * (std::fabs(scores[j - 2]) + 1e-12)) return j - 1;
    }
    const auto it = std::min_element(scores.begin(), scores.end());
    return static_cast<int>(std::distance(scores.begin(), it)) + 1;
}

double pdf(const GmmParams& params, double x) {
    const double inv_sigma = 1.0 / params.sigma;
    const double norm = inv_sigma / std::sqrt(2.0 * std::numbers::pi);
    double acc = 0.0;
    for (int c = 0; c < params.n_components(); ++c) {
        const double z = (x - params.means[c]) * inv_sigma;
        acc += params.weights[c] * norm * std::exp(-0.5 * z * z);
    }
    return acc;
}

double cdf(const GmmParams& params, double t) {
    constexpr double inv_sqrt2 = 0.707106781186547524;
    double acc = 0.0;
    for (int c = 0; c < params.n_components(); ++c) {
        const double z = (t - params.means[c]) / params.sigma;
        acc += params.weights[c] * 0.5 * std::erfc(-z * inv_sqrt2);
    }
    return std::clamp(acc, 0.0, 1.0);
}

std::vector<double> sample(const GmmParams& params, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    std::vector<double> cumulative(params.weights.size());
    std::partial_sum(params.weights.begin(), params.weights.end(), cumulative.begin());

    Rng rng(seed);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform() * cumulative.back();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto c = std::min<std::size_t>(std::distance(cumulative.begin(), it),
                                             cumulative.size() - 1);
        out[i] = params.means[c] + params.sigma * rng.normal();
    }
    return out;
}

GmmParams sort_components(const GmmParams& params) {
    const int j = params.n_components();
    std::vector<int> order(j);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return params.means[a] < params.means[b]; });
    GmmParams out;
    out.sigma = params.sigma;
    out.means.reserve(j);
    out.weights.reserve(j);
    for (int idx : order) {
        out.means.push_back(params.means[idx]);
        out.weights.push_back(params.weights[idx]);
    }
    return out;
}

std::string to_json(const GmmParams& params) {
    nlohmann::json j;
    j["J"] = params.n_components();
    j["sigma"] = params.sigma;
    j["means"] = params.means;
    j["weights"] = params.weights;
    return j.dump();
}

GmmParams gmm_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    GmmParams params;
    params.sigma = j.at("sigma").get<double>();
    params.means = j.at("means").get<std::vector<double>>();
    params.weights = j.at("weights").get<std::vector<double>>();
    if (j.at("J").get<int>() != params.n_components())
        throw std::invalid_argument("GmmParams JSON: J does not match means length");
    validate(params);
    return params;
}

}  // namespace remfl
