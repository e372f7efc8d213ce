// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_BIQUAD_HPP
#define LOCHAIN_BIQUAD_HPP

#include <complex>
#include <numbers>
#include <span>

namespace lochain {

/// Continuous-time second-order section (b2 s^2 + b1 s + b0) / (a2 s^2 + a1 s + a0).
struct ContinuousSos {
  double b2 = 0.0, b1 = 0.0, b0 = 0.0;
  double a2 = 1.0, a1 = 0.0, a0 = 1.0;

  std::complex<double> response(double f_hz) const {
    const std::complex<double> s(0.0, 2.0 * std::numbers::pi * f_hz);
    return (b2 * s * s + b1 * s + b0) / (a2 * s * s + a1 * s + a0);
  }
};

/// Discrete biquad (direct form II transposed) obtained from a continuous
/// prototype by the bilinear transform. DC gain is preserved exactly.
class Biquad {
 public:
  Biquad() = default;

  static Biquad bilinear(const ContinuousSos& sos, double sample_rate_hz) {
    const double k = 2.0 * sample_rate_hz;
    const double k2 = k * k;
    const double a0 = sos.a2 * k2 + sos.a1 * k + sos.a0;
    Biquad q;
    q.b0_ = (sos.b2 * k2 + sos.b1 * k + sos.b0) / a0;
    q.b1_ = (2.0 * sos.b0 - 2.0 * sos.b2 * k2) / a0;
    q.b2_ = (sos.b2 * k2 - sos.b1 * k + sos.b0) / a0;
    q.a1_ = (2.0 * sos.a0 - 2.0 * sos.a2 * k2) / a0;
    q.a2_ = (sos.a2 * k2 - sos.a1 * k + sos.a0) / a0;
    return q;
  }

  double step(double x) {
    const double y = b0_ * x + s1_;
    s1_ = b1_ * x - a1_ * y + s2_;
    s2_ = b2_ * x - a2_ * y;
    return y;
  }

  void process(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = step(in[i]);
  }

  /// In-place variant.
  void process(std::span<double> data) { process(data, data); }

  void reset() { s1_ = s2_ = 0.0; }

 private:
  double b0_ = 1.0, b1_ = 0.0, b2_ = 0.0;
  double a1_ = 0.0, a2_ = 0.0;
  double s1_ = 0.0, s2_ = 0.0;
};

}  // namespace lochain

#endif
