// SPDX-License-Identifier: Apache-2.0

#include "lochain/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace lochain {

double PsdEstimate::at(double f_hz) const {
  if (freq_hz.empty()) throw std::logic_error("empty PSD estimate");
  const double df = freq_hz.size() > 1 ? freq_hz[1] - freq_hz[0] : 1.0;
  auto k = static_cast<std::size_t>(std::llround(f_hz / df));
  k = std::min(k, freq_hz.size() - 1);
  return psd[k];
}

WelchAverager::WelchAverager(double sample_rate_hz, int nfft)
    : sample_rate_hz_(sample_rate_hz), nfft_(nfft) {
  if (nfft < 8) throw std::invalid_argument("nfft too small");
  window_.resize(nfft);
  window_power_ = 0.0;
  for (int n = 0; n < nfft; ++n) {
    window_[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / nfft));
    window_power_ += window_[n] * window_[n];
  }
  accum_.assign(nfft / 2 + 1, 0.0);
}

void WelchAverager::add(std::span<const double> x) {
  if (x.size() < static_cast<std::size_t>(nfft_)) return;
  Eigen::FFT<double> fft;
  std::vector<double> seg(nfft_);
  std::vector<std::complex<double>> spec;
  const std::size_t hop = static_cast<std::size_t>(nfft_) / 2;
  for (std::size_t start = 0; start + nfft_ <= x.size(); start += hop) {
    double mean = 0.0;
    for (int n = 0; n < nfft_; ++n) mean += x[start + n];
    mean /= nfft_;
    for (int n = 0; n < nfft_; ++n) seg[n] = (x[start + n] - mean) * window_[n];
    fft.fwd(spec, seg);
    for (std::size_t k = 0; k < accum_.size(); ++k) accum_[k] += std::norm(spec[k]);
    ++n_segments_;
  }
}

PsdEstimate WelchAverager::estimate() const {
  if (n_segments_ == 0) throw std::logic_error("no segments accumulated");
  PsdEstimate out;
  const std::size_t bins = accum_.size();
  out.freq_hz.resize(bins);
  out.psd.resize(bins);
  const double scale = 1.0 / (sample_rate_hz_ * window_power_ * n_segments_);
  for (std::size_t k = 0; k < bins; ++k) {
    out.freq_hz[k] = static_cast<double>(k) * sample_rate_hz_ / nfft_;
    // One-sided: double everything except DC and Nyquist.
    const double one_sided = (k == 0 || k == bins - 1) ? 1.0 : 2.0;
    out.psd[k] = one_sided * accum_[k] * scale;
  }
  return out;
}

}  // namespace lochain
