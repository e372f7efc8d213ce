// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_CHANNEL_LINK_HPP
#define LOCHAIN_CHANNEL_LINK_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "lochain/rng.hpp"

namespace lochain {

/// One column of the link-budget table.
struct LinkBudget {
  std::string label = "link";
  double bandwidth_hz = 2e9;
  double rx_nf_db = 5.0;
  double carrier_hz = 60e9;
  double loss_exponent = 2.2;
  double distance_m = 100.0;
  double target_snr_db = 26.0;
  double bs_gain_db = 0.0;
  double ue_gain_db = 0.0;

  void validate() const;
};

/// Path loss referenced to 1 m of free space:
/// 20*log10(4*pi*f/c) + 10*n*log10(d).
double path_loss_db(double carrier_hz, double distance_m, double loss_exponent);

/// Thermal noise power in dBm: -174 + 10*log10(BW) + NF.
double noise_power_dbm(double bandwidth_hz, double nf_db);

/// Radiated transmit power needed to hit the target SNR.
double required_tx_power_dbm(const LinkBudget& budget);

/// M x K line-of-sight channel for a half-wavelength-spaced uniform linear
/// array: unit-modulus steering columns.
struct ChannelMatrix {
  Eigen::MatrixXcd h;                  // M x K
  double spacing_wavelengths = 0.5;
  std::vector<double> user_angles_deg;
  bool has_duplicate_angles = false;   // ZF will be ill-conditioned if set
};

ChannelMatrix los_channel(int m_elements, const std::vector<double>& user_angles_deg,
                          double spacing_wavelengths = 0.5);

/// y = H x + n with circularly symmetric complex Gaussian noise of per-element
/// power `noise_power` (linear; 0 disables noise).
Eigen::VectorXcd apply_channel(const ChannelMatrix& channel, const Eigen::VectorXcd& x,
                               double noise_power, GaussianSampler& rng);

/// Evenly spread K angles with the given separation, centered on broadside.
std::vector<double> separated_angles(int k_users, double separation_deg);

}  // namespace lochain

#endif
