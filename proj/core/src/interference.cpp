#include "remfl/interference.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "remfl/rng.hpp"

namespace remfl {

namespace {

// Stream tags for deriving independent per-purpose seeds within a capture.
constexpr std::uint64_t kTraceStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kFadingStream = 3;
constexpr std::uint64_t kWaveformStream = 4;

}  // namespace

std::vector<BusyInterval> generate_occupancy_trace(const TrafficModel& traffic,
                                                   double duration_ms, std::uint64_t seed) {
    if (!(duration_ms > 0.0))
        throw std::invalid_argument("generate_occupancy_trace: duration must be > 0");
    if (!(traffic.idle_rate_per_ms > 0.0) || !(traffic.busy_ms > 0.0))
        throw std::invalid_argument("generate_occupancy_trace: invalid traffic model");

    Rng rng(seed);
    std::vector<BusyInterval> trace;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(traffic.idle_rate_per_ms);
        if (t >= duration_ms) break;
        const double end = std::min(t + traffic.busy_ms, duration_ms);
        trace.push_back({t, end});
        t = end;
        if (t >= duration_ms) break;
    }
    return trace;
}

double path_loss_gain(double distance_m, double center_freq_hz, const PathLossModel& model) {
    if (!(distance_m > 0.0))
        throw std::invalid_argument("path_loss_gain: distance must be > 0");
    if (!(center_freq_hz > 0.0))
        throw std::invalid_argument("path_loss_gain: frequency must be > 0");

    const double wavelength = kSpeedOfLight / center_freq_hz;
    const double breakpoint =
        4.0 * model.tx_height_m * model.rx_height_m / wavelength;
    const double ref = std::pow(wavelength / (4.0 * std::numbers::pi), 2.0);

    double gain;
    if (distance_m <= breakpoint) {
        gain = ref / std::pow(distance_m, model.near_exponent);
    } else {
        const double at_break = ref / std::pow(breakpoint, model.near_exponent);
        gain = at_break * std::pow(breakpoint / distance_m, model.far_exponent);
    }
    return std::min(gain, 1.0);
}

std::vector<std::complex<double>> small_scale_gain(std::span<const double> pdp_powers,
                                                   int n_subcarriers, std::uint64_t seed) {
    if (pdp_powers.empty())
        throw std::invalid_argument("small_scale_gain: empty power-delay profile");
    if (n_subcarriers < 1 || pdp_powers.size() > static_cast<std::size_t>(n_subcarriers))
        throw std::invalid_argument("small_scale_gain: need 1 <= taps <= n_subcarriers");
    double sum = 0.0;
    for (double p : pdp_powers) sum += p;
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("small_scale_gain: PDP must be normalized to sum 1");

    Rng rng(seed);
    std::vector<std::complex<double>> gains(n_subcarriers, {0.0, 0.0});
    std::vector<std::complex<double>> taps(pdp_powers.size());
    for (std::size_t k = 0; k < taps.size(); ++k) taps[k] = rng.complex_normal(pdp_powers[k]);

    const double step = -2.0 * std::numbers::pi / n_subcarriers;
    for (int f = 0; f < n_subcarriers; ++f) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const double phi = step * static_cast<double>(f) * static_cast<double>(k);
            acc += taps[k] * std::complex<double>{std::cos(phi), std::sin(phi)};
        }
        gains[f] = acc;
    }
    return gains;
}

double thermal_noise_power(double temperature_k, double bandwidth_hz) {
    if (!(temperature_k > 0.0) || !(bandwidth_hz > 0.0))
        throw std::invalid_argument("thermal_noise_power: temperature and bandwidth must be > 0");
    return kBoltzmann * temperature_k * bandwidth_hz;
}

InterferenceSynthesizer::InterferenceSynthesizer(const ScenarioConfig& scenario,
                                                 int location_index, int channel_index,
                                                 long total_samples, std::uint64_t seed)
    : pdp_(scenario.pdp_powers),
      total_samples_(total_samples),
      seed_(seed) {
    if (location_index < 0 || location_index >= static_cast<int>(scenario.locations.size()))
        throw std::out_of_range("synthesizer: location index out of range");
    if (channel_index < 0 || channel_index >= static_cast<int>(scenario.channels.size()))
        throw std::out_of_range("synthesizer: channel index out of range");
    const ChannelConfig& channel = scenario.channels[channel_index];
    segment_len_ = channel.n_subchannels;
    if (total_samples <= 0 || total_samples % segment_len_ != 0)
        throw std::invalid_argument("synthesizer: sample count must be a positive multiple of N_f");

    noise_power_ = thermal_noise_power(scenario.temperature_k, channel.bandwidth_hz);
    const Position here = scenario.locations[location_index];
    const double samples_per_ms = channel.bandwidth_hz * 1e-3;
    const double duration_ms = static_cast<double>(total_samples) / samples_per_ms;

    for (std::size_t a = 0; a < scenario.access_points.size(); ++a) {
        const AccessPoint& ap = scenario.access_points[a];
        if (ap.channel_index != channel_index) continue;
        ApState state;
        const double gain = path_loss_gain(distance_m(ap.position, here),
                                           channel.center_freq_hz, scenario.path_loss);
        state.amplitude = std::sqrt(ap.tx_power_w * gain);
        const auto trace = generate_occupancy_trace(
            ap.traffic, duration_ms,
            derive_seed(seed, {kTraceStream, static_cast<std::uint64_t>(a)}));
        for (const auto& interval : trace) {
            state.busy_start.push_back(
                static_cast<long>(std::ceil(interval.start_ms * samples_per_ms)));
            state.busy_end.push_back(
                static_cast<long>(std::ceil(interval.end_ms * samples_per_ms)));
        }
        state.tail.assign(pdp_.size() > 1 ? pdp_.size() - 1 : 0, {0.0, 0.0});
        aps_.push_back(std::move(state));
    }
}

void InterferenceSynthesizer::add_ap_segment(ApState& ap, int ap_index, long segment,
                                             std::span<std::complex<double>> out) {
    const long seg_start = segment * segment_len_;
    const long seg_end = seg_start + segment_len_;

    while (ap.cursor < ap.busy_end.size() && ap.busy_end[ap.cursor] <= seg_start) ++ap.cursor;
    const bool busy_here =
        ap.cursor < ap.busy_start.size() && ap.busy_start[ap.cursor] < seg_end;
    if (!busy_here && !ap.tail_active) return;

    Rng fading(derive_seed(seed_, {kFadingStream, static_cast<std::uint64_t>(ap_index),
                                   static_cast<std::uint64_t>(segment)}));
    std::vector<std::complex<double>> taps(pdp_.size());
    for (std::size_t k = 0; k < taps.size(); ++k) taps[k] = fading.complex_normal(pdp_[k]);

    // Reconstruct this segment's transmitted waveform; RNG draws are consumed
    // only on busy samples so idle stretches cost nothing.
    Rng waveform(derive_seed(seed_, {kWaveformStream, static_cast<std::uint64_t>(ap_index),
                                     static_cast<std::uint64_t>(segment)}));
    std::vector<std::complex<double>> input(segment_len_, {0.0, 0.0});
    if (busy_here) {
        std::size_t c = ap.cursor;
        for (long m = seg_start; m < seg_end; ++m) {
            while (c < ap.busy_end.size() && ap.busy_end[c] <= m) ++c;
            if (c >= ap.busy_start.size()) break;
            if (m >= ap.busy_start[c])
                input[m - seg_start] = ap.amplitude * waveform.complex_normal(1.0);
        }
    }

    const int tail_len = static_cast<int>(ap.tail.size());
    for (int p = 0; p < segment_len_; ++p) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const long q = p - static_cast<long>(k);
            const std::complex<double> w =
                q >= 0 ? input[q]
                       : (tail_len > 0 ? ap.tail[tail_len + q] : std::complex<double>{});
            if (w.real() != 0.0 || w.imag() != 0.0) acc += taps[k] * w;
        }
        out[p] += acc;
    }

    if (tail_len > 0) {
        ap.tail_active = false;
        for (int k = 0; k < tail_len; ++k) {
            ap.tail[k] = input[segment_len_ - tail_len + k];
            if (ap.tail[k] != std::complex<double>{}) ap.tail_active = true;
        }
    }
}

void InterferenceSynthesizer::next(std::span<std::complex<double>> out) {
    if (out.size() % segment_len_ != 0)
        throw std::invalid_argument("synthesizer: chunk must be a multiple of N_f");
    if (static_cast<long>(out.size()) > samples_remaining())
        throw std::invalid_argument("synthesizer: chunk exceeds remaining samples");

    const long first_segment = emitted_ / segment_len_;
    const long n_segments = static_cast<long>(out.size()) / segment_len_;
    for (long g = 0; g < n_segments; ++g) {
        const long segment = first_segment + g;
        auto chunk = out.subspan(g * segment_len_, segment_len_);
        Rng noise(derive_seed(seed_, {kNoiseStream, static_cast<std::uint64_t>(segment)}));
        for (auto& s : chunk) s = noise.complex_normal(noise_power_);
        for (std::size_t a = 0; a < aps_.size(); ++a)
            add_ap_segment(aps_[a], static_cast<int>(a), segment, chunk);
    }
    emitted_ += static_cast<long>(out.size());
}

IqBatch synthesize_iq_batch(const ScenarioConfig& scenario, int location_index,
                            int channel_index, int m_samples, std::uint64_t seed) {
    InterferenceSynthesizer synth(scenario, location_index, channel_index, m_samples, seed);
    IqBatch batch;
    batch.location_index = location_index;
    batch.channel_index = channel_index;
    batch.samples.resize(m_samples);
    synth.next(batch.samples);
    return batch;
}

}  // namespace remfl
