// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_SPECTRAL_HPP
#define LOCHAIN_SPECTRAL_HPP

#include <cmath>
#include <span>
#include <vector>

namespace lochain {

/// One-sided power spectral density estimate, psd[k] at freq_hz[k] in
/// (units of x)^2 / Hz. For phase traces this is rad^2/Hz.
struct PsdEstimate {
  std::vector<double> freq_hz;
  std::vector<double> psd;

  /// PSD value at the bin nearest `f_hz`.
  double at(double f_hz) const;
};

/// Welch PSD estimator that averages Hann-windowed, mean-removed segments
/// across one or more realizations. Segment length nfft, 50% overlap.
class WelchAverager {
 public:
  WelchAverager(double sample_rate_hz, int nfft);

  /// Accumulate all full segments of one realization.
  void add(std::span<const double> x);

  PsdEstimate estimate() const;
  long segments() const { return n_segments_; }

 private:
  double sample_rate_hz_;
  int nfft_;
  std::vector<double> window_;
  double window_power_;  // sum of w[n]^2
  std::vector<double> accum_;
  long n_segments_ = 0;
};

/// Convert a one-sided phase PSD (rad^2/Hz) to the single-sideband
/// phase-noise convention used throughout: L(f) = S_phi(f)/2 in dBc/Hz.
inline double phase_psd_to_dbchz(double psd) { return 10.0 * std::log10(psd / 2.0); }

}  // namespace lochain

#endif
