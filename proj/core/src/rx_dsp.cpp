// SPDX-License-Identifier: Apache-2.0

#include "lochain/rx_dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lochain {

Eigen::MatrixXcd estimate_channel(const Eigen::MatrixXcd& h,
                                  std::span<const double> element_phases) {
  if (static_cast<Eigen::Index>(element_phases.size()) != h.rows())
    throw std::invalid_argument("estimate_channel: phase vector length must equal M");
  Eigen::MatrixXcd h_hat = h;
  for (Eigen::Index m = 0; m < h.rows(); ++m)
    h_hat.row(m) *= std::polar(1.0, element_phases[m]);
  return h_hat;
}

Beamformer beamform_conj(const Eigen::MatrixXcd& h_hat) {
  Beamformer bf;
  bf.kind = BeamformerKind::conjugate;
  bf.w = h_hat.adjoint() / static_cast<double>(h_hat.rows());
  return bf;
}

Beamformer beamform_zf(const Eigen::MatrixXcd& h_hat, double cond_limit) {
  const Eigen::MatrixXcd gram = h_hat.adjoint() * h_hat;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h_hat);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > cond_limit)
    throw std::runtime_error("beamform_zf: channel estimate is ill-conditioned");
  Beamformer bf;
  bf.kind = BeamformerKind::zero_forcing;
  bf.w = gram.ldlt().solve(h_hat.adjoint());
  return bf;
}

Eigen::VectorXcd apply_phase_noise_rx(const Beamformer& bf, const Eigen::MatrixXcd& h,
                                      const Eigen::VectorXcd& x, std::span<const double> phases,
                                      const Eigen::VectorXcd& noise) {
  if (static_cast<Eigen::Index>(phases.size()) != h.rows() || x.size() != h.cols() ||
      noise.size() != h.rows())
    throw std::invalid_argument("apply_phase_noise_rx: dimension mismatch");
  Eigen::VectorXcd y = h * x + noise;
  for (Eigen::Index m = 0; m < y.size(); ++m) y(m) *= std::polar(1.0, phases[m]);
  return bf.w * y;
}

void CarrierRecoveryParams::validate(double symbol_rate_hz) const {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("CarrierRecoveryParams: bandwidth must be > 0");
  if (!(bandwidth_hz < symbol_rate_hz / 20.0))
    throw std::invalid_argument("CarrierRecoveryParams: bandwidth must be < symbol_rate/20");
  if (!(damping > 0.0)) throw std::invalid_argument("CarrierRecoveryParams: damping must be > 0");
}

CarrierRecovery::CarrierRecovery(const CarrierRecoveryParams& params, double symbol_rate_hz,
                                 const Constellation& constellation)
    : constellation_(constellation) {
  params.validate(symbol_rate_hz);
  const double wn = 2.0 * std::numbers::pi * params.natural_frequency_hz();
  const double t = 1.0 / symbol_rate_hz;
  kp_ = 2.0 * params.damping * wn * t;
  ki_ = wn * wn * t * t;
}

CarrierRecovery::Step CarrierRecovery::step(std::complex<double> in) {
  Step out;
  out.corrected = in * std::polar(1.0 / (agc_on_ ? agc_gain_ : 1.0), -psi_);
  out.decision = constellation_.nearest(out.corrected);
  const std::complex<double> d = constellation_.point(out.decision);
  out.phase_error = std::arg(out.corrected * std::conj(d));
  integ_ += ki_ * out.phase_error;
  psi_ += kp_ * out.phase_error + integ_;
  if (agc_on_) {
    const double g_inst = (out.corrected * std::conj(d)).real() / std::norm(d);
    // g_inst is measured post-correction, so it updates the gain estimate
    // multiplicatively.
    agc_gain_ += agc_mu_ * (g_inst - 1.0) * agc_gain_;
  }
  return out;
}

void CarrierRecovery::reset() {
  psi_ = 0.0;
  integ_ = 0.0;
  agc_gain_ = 1.0;
}

void CarrierRecovery::reset_phase_tracking() {
  psi_ = 0.0;
  integ_ = 0.0;
}

double estimate_mean_gain(std::span<const std::complex<double>> rx,
                          std::span<const std::complex<double>> ref) {
  if (rx.size() != ref.size() || rx.empty())
    throw std::invalid_argument("estimate_mean_gain: need equal-length, non-empty windows");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] * std::conj(ref[i])).real();
    den += std::norm(ref[i]);
  }
  if (!(den > 0.0)) throw std::invalid_argument("estimate_mean_gain: reference has zero power");
  return num / den;
}

std::vector<std::complex<double>> slow_agc(std::span<const std::complex<double>> rx,
                                           std::span<const std::complex<double>> ref) {
  const double g = estimate_mean_gain(rx, ref);
  std::vector<std::complex<double>> out(rx.begin(), rx.end());
  for (auto& z : out) z /= g;
  return out;
}

double coherent_gain_predict(double sigma2) { return std::exp(-sigma2 / 2.0); }

TaylorResiduals taylor_residuals(const std::vector<std::vector<double>>& phi) {
  if (phi.empty()) throw std::invalid_argument("taylor_residuals: need at least one element");
  const std::size_t m = phi.size();
  const std::size_t n = phi.front().size();
  TaylorResiduals out;
  out.theta.assign(n, 0.0);
  out.gain.assign(n, 0.0);
  for (const auto& row : phi) {
    if (row.size() != n) throw std::invalid_argument("taylor_residuals: ragged input");
    for (std::size_t t = 0; t < n; ++t) {
      out.theta[t] += row[t];
      out.gain[t] += 1.0 - 0.5 * row[t] * row[t];
    }
  }
  for (std::size_t t = 0; t < n; ++t) {
    out.theta[t] /= static_cast<double>(m);
    out.gain[t] /= static_cast<double>(m);
  }
  return out;
}

}  // namespace lochain
