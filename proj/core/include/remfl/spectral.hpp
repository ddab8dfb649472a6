#pragma once

#include <span>
#include <string>
#include <vector>

#include "remfl/interference.hpp"
#include "remfl/scenario.hpp"

namespace remfl {

/// Per-segment, per-sub-channel received power in watts.
///
/// Convention: row r, bin f holds |DFT_Nf(segment r)[f]|^2 / Nf^2, i.e. the
/// physical power falling into one sub-channel of width B/Nf. White noise of
/// total power P then averages P/Nf per bin, matching the per-sub-channel
/// noise term of the capacity and outage formulas.
struct PowerGrid {
    int n_segments = 0;
    int n_bins = 0;
    std::vector<double> values;  // row-major
    int location_index = 0;
    int channel_index = 0;

    double at(int segment, int bin) const { return values[segment * n_bins + bin]; }
};

/// Splits the batch into M/Nf non-overlapping segments and transforms each
/// (rectangular window). Throws std::invalid_argument when M % Nf != 0.
PowerGrid segment_power_grid(const IqBatch& iq, const ChannelConfig& channel);

/// N_s samples of the aggregated interference statistic chi.
struct ChiBatch {
    std::vector<double> chi;
    int location_index = 0;
    int channel_index = 0;
};

/// chi = ln(sum over usable bins of 1/P_f), one value per segment. The
/// measured P_f already contains the noise, so no extra noise term is added.
/// Throws std::invalid_argument on non-positive powers or bad bin indices.
ChiBatch aggregate_chi(const PowerGrid& grid, std::span<const int> usable_subchannels);

/// Debug dumps, one CSV row per segment.
void write_power_grid_csv(const PowerGrid& grid, const std::string& path);
void write_chi_csv(const ChiBatch& batch, const std::string& path);

}  // namespace remfl
