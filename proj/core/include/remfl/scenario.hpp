#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "remfl/gmm.hpp"

namespace remfl {

struct Position {
    double x_m = 0.0;
    double y_m = 0.0;
};

double distance_m(const Position& a, const Position& b);

/// Two-state renewal traffic: exponentially distributed idle gaps followed by
/// fixed-length busy periods.
struct TrafficModel {
    double idle_rate_per_ms = 0.0054;  // lambda of the exponential idle time
    double busy_ms = 0.81;             // data + ACK, fixed
};

struct AccessPoint {
    Position position;
    int channel_index = 0;
    TrafficModel traffic;
    double tx_power_w = 0.1;  // total EIRP, spread uniformly over the channel
};

struct ChannelConfig {
    double center_freq_hz = 2.437e9;
    double bandwidth_hz = 10e6;
    int n_subchannels = 64;
    std::vector<int> usable_subchannels;  // bins entering the aggregation
    double subcarrier_spacing_hz = 156.25e3;
};

/// The 802.11-style layout: n_usable bins around DC, DC itself excluded.
std::vector<int> centered_usable_subchannels(int n_subchannels, int n_usable);

/// Two-slope distance power law, free space up to the breakpoint
/// 4*h_tx*h_rx*f/c and a steeper exponent beyond it.
struct PathLossModel {
    double near_exponent = 2.0;
    double far_exponent = 4.0;
    double tx_height_m = 1.5;
    double rx_height_m = 1.5;
};

/// Intra-platoon link parameters for the channel-quality assessment.
struct LinkConfig {
    double tx_power_per_subchannel_w = 2.0845e-3;  // 3.19 dBm
    double capacity_threshold_bps = 3e6;
    double leader_tail_distance_m = 50.0;
    double antenna_gain_db = 0.0;
};

/// k caps the weight of the stored model at k * n_s samples; n_s is the
/// number of aggregated-interference samples per capture.
struct LearningConfig {
    int k = 5;
    int n_s = 4096;
};

struct ScenarioConfig {
    std::vector<Position> locations;
    std::vector<AccessPoint> access_points;
    std::vector<ChannelConfig> channels;
    LinkConfig link;
    PathLossModel path_loss;
    std::vector<double> pdp_powers;  // normalized power-delay profile taps
    double temperature_k = 293.15;
    LearningConfig learning;
    int mixture_components = 7;  // J, fixed for the whole system run
    EmOptions em;
    int platoons = 1;
    int laps = 15;
    std::vector<std::uint64_t> seeds;

    int capture_samples(int channel_index) const;  // M = n_s * N_f
};

/// The shipped route/AP layout (1 km, 30 locations, 11 access points on the
/// three 2.4 GHz WLAN channels).
ScenarioConfig default_scenario();

/// Throws std::invalid_argument describing the first violated constraint.
void validate_scenario(const ScenarioConfig& scenario);

/// JSON round-trip. Any key missing from the document keeps its default;
/// unknown keys are rejected. See README for the schema.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& scenario);
void save_scenario(const ScenarioConfig& scenario, const std::string& path);

}  // namespace remfl
