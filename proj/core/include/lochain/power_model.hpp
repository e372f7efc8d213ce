// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_POWER_MODEL_HPP
#define LOCHAIN_POWER_MODEL_HPP

#include <vector>

namespace lochain {

/// Inputs to the LO distribution power model. Distances in mm, losses in dB,
/// powers in W. The array is assumed to be fed by a rectangular H-tree, so
/// m_elements (and every evaluated N) must be a power of two.
struct PowerModelParams {
  int m_elements = 128;
  double d_x_mm = 64.0;
  double d_y_mm = 32.0;
  double loss_db_per_mm = 0.2;
  double splitter_loss_db = 1.5;  // excess loss of one P-way splitter
  int splitter_ways = 4;
  double vco_fom_dbchz = 180.0;
  double pn_target_dbchz = -90.0;   // phase-noise spec of a single central VCO
  double pn_offset_hz = 1e6;
  double f_lo_hz = 75e9;
  double eta_osc = 0.2;
  double eta_driver = 0.2;
  double pll_overhead_w = 2e-3;  // per PLL
  double load_w = 0.0;           // total power delivered to the mixers

  void validate() const;
};

/// H-tree routing loss downstream of one PLL serving N elements:
/// 0.5 * sum_{s=0}^{log2(N)-1} 2^(s-log2(M)) * (D_X + D_Y) * L_mm. Empty sum
/// (0 dB) for N = 1.
double routing_loss_db(int n_per_pll, const PowerModelParams& p);

/// Splitter excess loss for an N-way fanout built from P-way splitters:
/// L_split * log_P(N).
double splitter_loss_db(int n_per_pll, const PowerModelParams& p);

/// DC power of a single central VCO meeting the phase-noise target, from the
/// FoM identity P_dBm = |L(f_d)| + 20*log10(f_LO/f_d) - FoM.
double vco_power_w(const PowerModelParams& p);

/// Total distribution power. In dBm:
/// P_distr = P_vco_per_pll - 10*log10(N) + L_sep + L_route
///           - 10*log10(eta_osc * eta_driver),
/// where P_vco_per_pll is the central VCO power relaxed by the number of
/// PLLs (10*log10(N/M)); with lossless distribution the result is then
/// independent of N.
double distribution_power_w(int n_per_pll, const PowerModelParams& p);

/// P_load + P_distr(N) + P_VCO + (M/N) * P_pll_overhead. Reference
/// distribution power is neglected.
double total_lo_power_w(int n_per_pll, const PowerModelParams& p);

struct PowerSweepPoint {
  int n_per_pll = 0;
  double distr_w = 0.0;
  double pll_w = 0.0;
  double vco_w = 0.0;
  double total_w = 0.0;
};

struct PowerSweep {
  std::vector<PowerSweepPoint> points;  // every power-of-two N dividing M
  int argmin_n = 0;
  double min_total_w = 0.0;
};

PowerSweep sweep_power(const PowerModelParams& p);

}  // namespace lochain

#endif
