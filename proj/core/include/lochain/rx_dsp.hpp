// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_RX_DSP_HPP
#define LOCHAIN_RX_DSP_HPP

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "lochain/constellation.hpp"

namespace lochain {

enum class BeamformerKind { conjugate, zero_forcing };

struct Beamformer {
  BeamformerKind kind = BeamformerKind::conjugate;
  Eigen::MatrixXcd w;  // K x M
};

/// Ideal (noiseless) per-element channel estimate at the epoch instant:
/// Hhat = diag(exp(j*phi)) * H with phi the element phases at that instant.
Eigen::MatrixXcd estimate_channel(const Eigen::MatrixXcd& h, std::span<const double> element_phases);

/// Conjugate beamformer W = Hhat^H / M, scaled so the nominal gain is one.
Beamformer beamform_conj(const Eigen::MatrixXcd& h_hat);

/// Zero-forcing beamformer W = (Hhat^H Hhat)^-1 Hhat^H. Throws if the
/// estimate is ill-conditioned (condition number above `cond_limit`).
Beamformer beamform_zf(const Eigen::MatrixXcd& h_hat, double cond_limit = 1e8);

/// One received vector sample: x_hat = W * diag(exp(j*phi)) * (H x + n).
Eigen::VectorXcd apply_phase_noise_rx(const Beamformer& bf, const Eigen::MatrixXcd& h,
                                      const Eigen::VectorXcd& x, std::span<const double> phases,
                                      const Eigen::VectorXcd& noise);

struct CarrierRecoveryParams {
  double bandwidth_hz = 10e6;
  double damping = 0.70710678118654752;
  /// Loop gains come from the continuous second-order prototype with natural
  /// frequency bandwidth/0.786, discretized at the symbol rate.
  double natural_frequency_hz() const { return bandwidth_hz / 0.786; }

  void validate(double symbol_rate_hz) const;
};

/// Decision-directed type-II carrier recovery loop (proportional plus
/// double-integrator: the NCO provides the second pole at DC). Strictly
/// sequential per symbol stream.
class CarrierRecovery {
 public:
  CarrierRecovery(const CarrierRecoveryParams& params, double symbol_rate_hz,
                  const Constellation& constellation);

  struct Step {
    std::complex<double> corrected;  // input after phase/gain correction
    std::uint32_t decision = 0;
    double phase_error = 0.0;
  };

  Step step(std::complex<double> in);

  double phase() const { return psi_; }
  double gain() const { return agc_gain_; }
  void reset();
  /// Zero the phase and frequency accumulators but keep the AGC gain; used
  /// when a fresh channel estimate re-references the loop.
  void reset_phase_tracking();

  /// Enable the slow AGC inside the loop (gain tracked from decisions).
  void set_agc(bool on) { agc_on_ = on; }

 private:
  const Constellation& constellation_;
  double kp_ = 0.0;
  double ki_ = 0.0;
  double psi_ = 0.0;
  double integ_ = 0.0;
  bool agc_on_ = true;
  double agc_gain_ = 1.0;
  double agc_mu_ = 1e-3;
};

/// Data-aided batch gain estimate: the real scalar g minimizing
/// sum |rx - g*ref|^2 over the window, i.e. Re(sum rx*conj(ref)) / sum |ref|^2.
double estimate_mean_gain(std::span<const std::complex<double>> rx,
                          std::span<const std::complex<double>> ref);

/// Divide `rx` by its estimated mean gain (slow AGC as a one-shot block op).
std::vector<std::complex<double>> slow_agc(std::span<const std::complex<double>> rx,
                                           std::span<const std::complex<double>> ref);

/// Expected static beamforming gain E[exp(j*phi)] for zero-mean Gaussian
/// per-element phase of variance sigma2: the characteristic function
/// exp(-sigma2/2).
double coherent_gain_predict(double sigma2);

struct TaylorResiduals {
  std::vector<double> theta;  // per-sample mean phase, (1/M) sum phi_i
  std::vector<double> gain;   // per-sample (1/M) sum (1 - phi_i^2/2)
};

/// Small-angle decomposition of the beamformed sum (normalized by M so the
/// nominal gain is one).
TaylorResiduals taylor_residuals(const std::vector<std::vector<double>>& phi);

}  // namespace lochain

#endif
