#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "remfl/scenario.hpp"

namespace remfl {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct BusyInterval {
    double start_ms = 0.0;
    double end_ms = 0.0;
};

/// Alternating renewal process: Exp(lambda) idle gaps, fixed busy periods.
/// Intervals are sorted, non-overlapping and clipped to [0, duration].
std::vector<BusyInterval> generate_occupancy_trace(const TrafficModel& traffic,
                                                   double duration_ms, std::uint64_t seed);

/// Linear power gain of the two-slope model; continuous at the breakpoint
/// distance 4*h_tx*h_rx*f/c and clamped to (0, 1].
double path_loss_gain(double distance_m, double center_freq_hz,
                      const PathLossModel& model = {});

/// Per-subcarrier complex gains: Rayleigh taps with the given power-delay
/// profile, transformed to the frequency domain. E|gain|^2 = 1 per subcarrier.
std::vector<std::complex<double>> small_scale_gain(std::span<const double> pdp_powers,
                                                   int n_subcarriers, std::uint64_t seed);

/// k_B * T * bandwidth, watts.
double thermal_noise_power(double temperature_k, double bandwidth_hz);

struct IqBatch {
    std::vector<std::complex<double>> samples;
    int location_index = 0;
    int channel_index = 0;
};

/// Streams the received interference-plus-noise waveform at one location on
/// one channel, one N_f-sample segment at a time. Complex baseband sampled at
/// the channel bandwidth; access points contribute Gaussian bursts gated by
/// their occupancy traces, convolved with per-segment Rayleigh taps, on top
/// of thermal noise. Output depends only on (scenario, location, channel,
/// seed) and the sample index, not on the chunking of next() calls.
class InterferenceSynthesizer {
  public:
    InterferenceSynthesizer(const ScenarioConfig& scenario, int location_index,
                            int channel_index, long total_samples, std::uint64_t seed);

    /// Fills the next chunk; size must be a multiple of the segment length.
    void next(std::span<std::complex<double>> out);

    long samples_remaining() const { return total_samples_ - emitted_; }
    double noise_power_w() const { return noise_power_; }

  private:
    struct ApState {
        std::vector<long> busy_start;  // inclusive, in samples
        std::vector<long> busy_end;    // exclusive
        double amplitude = 0.0;        // sqrt(received power)
        std::size_t cursor = 0;
        std::vector<std::complex<double>> tail;  // last taps-1 input samples
        bool tail_active = false;
    };

    void add_ap_segment(ApState& ap, int ap_index, long segment,
                        std::span<std::complex<double>> out);

    std::vector<double> pdp_;
    std::vector<ApState> aps_;
    int segment_len_;
    double noise_power_;
    long total_samples_;
    long emitted_ = 0;
    std::uint64_t seed_;
};

/// One batch of M IQ samples (M divisible by N_f), deterministic in the seed.
IqBatch synthesize_iq_batch(const ScenarioConfig& scenario, int location_index,
                            int channel_index, int m_samples, std::uint64_t seed);

}  // namespace remfl
