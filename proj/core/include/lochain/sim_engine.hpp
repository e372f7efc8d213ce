// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_SIM_ENGINE_HPP
#define LOCHAIN_SIM_ENGINE_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lochain/channel_link.hpp"
#include "lochain/constellation.hpp"
#include "lochain/lo_architecture.hpp"
#include "lochain/rx_dsp.hpp"

namespace lochain {

/// End-to-end uplink simulation configuration. The element count lives in
/// arch.m_elements; thermal noise is per-element per-user SNR (off when
/// unset); phase noise can be disabled wholesale for AWGN-only baselines.
struct SimConfig {
  double symbol_rate_hz = 2e9;
  ConstellationKind constellation = ConstellationKind::qpsk;
  int k_users = 1;
  double user_separation_deg = 10.0;
  double element_spacing_wl = 0.5;
  std::optional<BeamformerKind> beamformer;  // unset: conjugate for K=1, ZF otherwise
  LoArchitecture arch;
  CarrierRecoveryParams cr;
  double epoch_s = 1e-4;
  std::size_t n_symbols = 200000;
  int n_trials = 10;
  std::uint64_t seed = 1;
  std::optional<double> thermal_snr_db;
  bool phase_noise = true;
  int jobs = 1;

  BeamformerKind effective_beamformer() const {
    return beamformer.value_or(k_users == 1 ? BeamformerKind::conjugate
                                            : BeamformerKind::zero_forcing);
  }

  /// Throws on structural violations; returns soft diagnostics (e.g. too few
  /// symbols for the slowest loop to be measured reliably).
  std::vector<std::string> validate() const;
};

struct UserMetrics {
  double sinr_db = 0.0;
  double evm = 0.0;
  double ber = 0.0;
  double static_gain = 1.0;
  double gain_var = 0.0;
  double resid_phase_var = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t bit_errors = 0;
};

struct SimMetrics {
  double sinr_db = 0.0;
  double evm = 0.0;
  double ber = 0.0;
  double static_gain = 1.0;
  double gain_var = 0.0;
  double resid_phase_var = 0.0;
  bool lock_lost = false;
  std::vector<UserMetrics> per_user;
  // Across-trial statistics (populated by run_uplink).
  int n_trials = 1;
  double sinr_std_db = 0.0;
  double sinr_ci95_db = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t bit_errors = 0;
};

/// One Monte Carlo trial (deterministic in (config.seed, trial_index)).
SimMetrics run_uplink_trial(const SimConfig& config, int trial_index);

/// Full run: config.n_trials trials (config.jobs in parallel), merged
/// deterministically. SINR statistics are across-trial mean/std/95% CI; BER is
/// pooled over all bits.
SimMetrics run_uplink(const SimConfig& config);

/// SINR after the optimal complex scalar fit of rx onto tx, capped at 100 dB.
double measure_sinr(std::span<const std::complex<double>> rx,
                    std::span<const std::complex<double>> tx);

/// Uncoded bit error rate between two symbol-index sequences of
/// bits_per_symbol-bit words.
double measure_ber(std::span<const std::uint32_t> rx_symbols,
                   std::span<const std::uint32_t> tx_symbols, int bits_per_symbol);

struct SweepPoint {
  double x = 0.0;  // swept quantity (bandwidth, K, N, SNR, ...)
  SimMetrics metrics;
};

std::vector<SweepPoint> sweep_pll_bandwidth(const SimConfig& config,
                                            const std::vector<double>& bandwidths_hz);
std::vector<SweepPoint> sweep_users(const SimConfig& config, const std::vector<int>& k_list);
std::vector<SweepPoint> sweep_subarray(const SimConfig& config, const std::vector<int>& n_list);

/// Least-squares fit of the interference ratio alpha in the power-controlled
/// multi-user SINR model
///   SINR(K) = S_u / (N_t + S_u*N_p + alpha*gamma*(K-1)*S_u*N_p)
/// with S_u = 1. N_p is measured from the K=1 point; the fit is linear in
/// 1/SINR. Degenerate when gamma = 0 or no K > 1 points exist.
struct SinrModelFit {
  bool valid = false;
  double alpha = 0.0;
  double n_p = 0.0;      // phase-noise power from the K=1 run
  double n_t = 0.0;      // thermal power used in the fit
  double max_residual_db = 0.0;
  std::vector<double> model_sinr_db;  // per input point
};

SinrModelFit fit_sinr_model(const std::vector<SweepPoint>& users_curve, double gamma,
                            double thermal_power_linear = 0.0);

/// SNR-dependent carrier-recovery bandwidth schedule: the entry with the
/// largest min_snr_db <= snr wins; below all entries the smallest-bandwidth
/// entry is used.
struct CrBandwidthPolicy {
  struct Entry {
    double min_snr_db = 0.0;
    double bandwidth_hz = 10e6;
  };
  std::vector<Entry> entries;

  double bandwidth_for(double snr_db) const;
  static CrBandwidthPolicy default_policy();
};

struct BerCurvePoint {
  ConstellationKind constellation = ConstellationKind::qpsk;
  double snr_db = 0.0;
  double cr_bandwidth_hz = 0.0;
  double ber_with_pn = 0.0;
  double ber_without_pn = 0.0;
  double sinr_with_pn_db = 0.0;
  double sinr_without_pn_db = 0.0;
  bool lock_lost = false;
};

std::vector<BerCurvePoint> ber_curve(const SimConfig& config, const std::vector<double>& snr_list,
                                     const std::vector<ConstellationKind>& constellations,
                                     const CrBandwidthPolicy& policy);

}  // namespace lochain

#endif
