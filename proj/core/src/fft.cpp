#include "remfl/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace remfl {

namespace {

int floor_log2(int n) {
    int l = 0;
    while ((1 << (l + 1)) <= n) ++l;
    return l;
}

}  // namespace

FftPlan::FftPlan(int size) : n_(size) {
    if (size <= 0) throw std::invalid_argument("FftPlan: size must be positive");
    log2n_ = ((size & (size - 1)) == 0) ? floor_log2(size) : -1;

    // One full-resolution twiddle table; stages index it with a stride so no
    // twiddle is ever produced by repeated multiplication.
    twiddles_.resize(n_);
    for (int k = 0; k < n_; ++k) {
        const double phi = -2.0 * std::numbers::pi * static_cast<double>(k) / n_;
        twiddles_[k] = {std::cos(phi), std::sin(phi)};
    }

    if (log2n_ >= 0) {
        bit_reversal_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            int rev = 0;
            for (int b = 0; b < log2n_; ++b) rev |= ((i >> b) & 1) << (log2n_ - 1 - b);
            bit_reversal_[i] = rev;
        }
    }
}

void FftPlan::forward(std::complex<double>* data) const {
    if (log2n_ < 0) {
        // Direct DFT; twiddle exponent reduced mod n.
        std::vector<std::complex<double>> out(n_);
        for (int k = 0; k < n_; ++k) {
            std::complex<double> acc{0.0, 0.0};
            long idx = 0;
            for (int j = 0; j < n_; ++j) {
                acc += data[j] * twiddles_[idx];
                idx += k;
                if (idx >= n_) idx -= n_;
            }
            out[k] = acc;
        }
        for (int k = 0; k < n_; ++k) data[k] = out[k];
        return;
    }

    for (int i = 0; i < n_; ++i) {
        const int j = bit_reversal_[i];
        if (i < j) std::swap(data[i], data[j]);
    }
    for (int len = 2; len <= n_; len <<= 1) {
        const int half = len >> 1;
        const int stride = n_ / len;
        for (int base = 0; base < n_; base += len) {
            for (int j = 0; j < half; ++j) {
                const std::complex<double> w = twiddles_[j * stride];
                const std::complex<double> u = data[base + j];
                const std::complex<double> v = data[base + j + half] * w;
                data[base + j] = u + v;
                data[base + j + half] = u - v;
            }
        }
    }
}

void FftPlan::forward(std::vector<std::complex<double>>& data) const {
    if (static_cast<int>(data.size()) != n_)
        throw std::invalid_argument("FftPlan: buffer size does not match plan size");
    forward(data.data());
}

}  // namespace remfl
