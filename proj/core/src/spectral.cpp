#include "remfl/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "remfl/fft.hpp"

namespace remfl {

PowerGrid segment_power_grid(const IqBatch& iq, const ChannelConfig& channel) {
    const int n_f = channel.n_subchannels;
    if (n_f <= 0) throw std::invalid_argument("segment_power_grid: n_subchannels must be > 0");
    if (iq.samples.empty() || iq.samples.size() % static_cast<std::size_t>(n_f) != 0)
        throw std::invalid_argument("segment_power_grid: sample count not a multiple of N_f");

    PowerGrid grid;
    grid.n_segments = static_cast<int>(iq.samples.size()) / n_f;
    grid.n_bins = n_f;
    grid.location_index = iq.location_index;
    grid.channel_index = iq.channel_index;
    grid.values.resize(static_cast<std::size_t>(grid.n_segments) * n_f);

    const FftPlan plan(n_f);
    const double scale = 1.0 / (static_cast<double>(n_f) * static_cast<double>(n_f));
    std::vector<std::complex<double>> work(n_f);
    for (int r = 0; r < grid.n_segments; ++r) {
        const std::complex<double>* src = iq.samples.data() + static_cast<std::size_t>(r) * n_f;
        for (int n = 0; n < n_f; ++n) work[n] = src[n];
        plan.forward(work.data());
        double* dst = grid.values.data() + static_cast<std::size_t>(r) * n_f;
        for (int f = 0; f < n_f; ++f) dst[f] = std::norm(work[f]) * scale;
    }
    return grid;
}

ChiBatch aggregate_chi(const PowerGrid& grid, std::span<const int> usable_subchannels) {
    if (usable_subchannels.empty())
        throw std::invalid_argument("aggregate_chi: empty usable sub-channel set");
    for (int f : usable_subchannels)
        if (f < 0 || f >= grid.n_bins)
            throw std::invalid_argument("aggregate_chi: usable sub-channel index out of range");

    ChiBatch batch;
    batch.location_index = grid.location_index;
    batch.channel_index = grid.channel_index;
    batch.chi.resize(grid.n_segments);
    for (int r = 0; r < grid.n_segments; ++r) {
        const double* row = grid.values.data() + static_cast<std::size_t>(r) * grid.n_bins;
        double acc = 0.0;
        for (int f : usable_subchannels) {
            const double p = row[f];
            if (!(p > 0.0))
                throw std::invalid_argument("aggregate_chi: non-positive sub-channel power");
            acc += 1.0 / p;
        }
        batch.chi[r] = std::log(acc);
    }
    return batch;
}

void write_power_grid_csv(const PowerGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_power_grid_csv: cannot write " + path);
    out << "segment";
    for (int f = 0; f < grid.n_bins; ++f) out << ",p" << f;
    out << "\n";
    char buf[32];
    for (int r = 0; r < grid.n_segments; ++r) {
        out << r;
        for (int f = 0; f < grid.n_bins; ++f) {
            std::snprintf(buf, sizeof(buf), ",%.17g", grid.at(r, f));
            out << buf;
        }
        out << "\n";
    }
}

void write_chi_csv(const ChiBatch& batch, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_chi_csv: cannot write " + path);
    out << "segment,chi\n";
    char buf[32];
    for (std::size_t r = 0; r < batch.chi.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "%.17g", batch.chi[r]);
        out << r << "," << buf << "\n";
    }
}

}  // namespace remfl
