// SPDX-License-Identifier: Apache-2.0

#include "lochain/channel_link.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lochain/units.hpp"

namespace lochain {

void LinkBudget::validate() const {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("LinkBudget: bandwidth must be > 0");
  if (!(distance_m >= 1.0)) throw std::invalid_argument("LinkBudget: distance must be >= 1 m");
  if (loss_exponent < 1.5 || loss_exponent > 6.0)
    throw std::invalid_argument("LinkBudget: loss exponent must be in [1.5, 6]");
}

double path_loss_db(double carrier_hz, double distance_m, double loss_exponent) {
  if (!(distance_m >= 1.0)) throw std::invalid_argument("path_loss_db: distance must be >= 1 m");
  const double free_space_1m = 20.0 * std::log10(4.0 * std::numbers::pi * carrier_hz / kSpeedOfLight);
  return free_space_1m + 10.0 * loss_exponent * std::log10(distance_m);
}

double noise_power_dbm(double bandwidth_hz, double nf_db) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("noise_power_dbm: bandwidth must be > 0");
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + nf_db;
}

double required_tx_power_dbm(const LinkBudget& b) {
  b.validate();
  return b.target_snr_db + noise_power_dbm(b.bandwidth_hz, b.rx_nf_db) +
         path_loss_db(b.carrier_hz, b.distance_m, b.loss_exponent) - b.bs_gain_db - b.ue_gain_db;
}

ChannelMatrix los_channel(int m_elements, const std::vector<double>& user_angles_deg,
                          double spacing_wavelengths) {
  const int k = static_cast<int>(user_angles_deg.size());
  if (m_elements < 1 || k < 1) throw std::invalid_argument("los_channel: need M >= 1 and K >= 1");
  if (k > m_elements) throw std::invalid_argument("los_channel: more users than elements");
  ChannelMatrix out;
  out.spacing_wavelengths = spacing_wavelengths;
  out.user_angles_deg = user_angles_deg;
  out.h.resize(m_elements, k);
  for (int u = 0; u < k; ++u) {
    const double deg = user_angles_deg[u];
    if (std::abs(deg) >= 90.0)
      throw std::invalid_argument("los_channel: user angles must satisfy |angle| < 90 deg");
    const double su = std::sin(deg * std::numbers::pi / 180.0);
    for (int m = 0; m < m_elements; ++m) {
      const double phase = 2.0 * std::numbers::pi * spacing_wavelengths * m * su;
      out.h(m, u) = std::polar(1.0, phase);
    }
    for (int v = 0; v < u; ++v)
      if (user_angles_deg[v] == deg) out.has_duplicate_angles = true;
  }
  return out;
}

Eigen::VectorXcd apply_channel(const ChannelMatrix& channel, const Eigen::VectorXcd& x,
                               double noise_power, GaussianSampler& rng) {
  if (x.size() != channel.h.cols()) throw std::invalid_argument("apply_channel: dimension mismatch");
  Eigen::VectorXcd y = channel.h * x;
  if (noise_power > 0.0) {
    const double s = std::sqrt(noise_power / 2.0);
    for (Eigen::Index m = 0; m < y.size(); ++m) y(m) += std::complex<double>(s * rng(), s * rng());
  }
  return y;
}

std::vector<double> separated_angles(int k_users, double separation_deg) {
  std::vector<double> angles(k_users);
  for (int u = 0; u < k_users; ++u)
    angles[u] = separation_deg * (u - 0.5 * (k_users - 1));
  return angles;
}

}  // namespace lochain
