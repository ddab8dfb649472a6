#pragma once

#include <complex>
#include <vector>

namespace remfl {

/// Precomputed forward DFT of a fixed size. Radix-2 for powers of two,
/// direct evaluation otherwise. The transform is unnormalized
/// (X[k] = sum_n x[n] e^{-2*pi*i*n*k/N}); callers apply their own scaling.
class FftPlan {
  public:
    explicit FftPlan(int size);

    int size() const { return n_; }

    /// In-place transform of exactly size() values.
    void forward(std::complex<double>* data) const;

    void forward(std::vector<std::complex<double>>& data) const;

  private:
    int n_;
    int log2n_;  // -1 when not a power of two
    std::vector<std::complex<double>> twiddles_;
    std::vector<int> bit_reversal_;
};

}  // namespace remfl
