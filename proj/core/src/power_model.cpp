// SPDX-License-Identifier: Apache-2.0

#include "lochain/power_model.hpp"

#include <cmath>
#include <stdexcept>

#include "lochain/units.hpp"

namespace lochain {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_int(int v) {
  int l = 0;
  while ((1 << l) < v) ++l;
  return l;
}

void check_n(int n, const PowerModelParams& p) {
  if (!is_power_of_two(n)) throw std::invalid_argument("power model: N must be a power of two");
  if (n > p.m_elements || p.m_elements % n != 0)
    throw std::invalid_argument("power model: N must divide M");
}

}  // namespace

void PowerModelParams::validate() const {
  if (!is_power_of_two(m_elements))
    throw std::invalid_argument("PowerModelParams: m_elements must be a power of two");
  if (loss_db_per_mm < 0.0 || splitter_loss_db < 0.0)
    throw std::invalid_argument("PowerModelParams: losses must be >= 0");
  if (splitter_ways < 2) throw std::invalid_argument("PowerModelParams: splitter_ways must be >= 2");
  if (!(eta_osc > 0.0 && eta_osc <= 1.0) || !(eta_driver > 0.0 && eta_driver <= 1.0))
    throw std::invalid_argument("PowerModelParams: efficiencies must be in (0, 1]");
  if (!(pn_offset_hz > 0.0)) throw std::invalid_argument("PowerModelParams: pn_offset_hz must be > 0");
  if (d_x_mm < 0.0 || d_y_mm < 0.0 || pll_overhead_w < 0.0 || load_w < 0.0)
    throw std::invalid_argument("PowerModelParams: dimensions and powers must be >= 0");
}

double routing_loss_db(int n_per_pll, const PowerModelParams& p) {
  check_n(n_per_pll, p);
  const int log2n = log2_int(n_per_pll);
  const int log2m = log2_int(p.m_elements);
  double sum = 0.0;
  for (int s = 0; s < log2n; ++s) sum += std::exp2(s - log2m);
  return 0.5 * sum * (p.d_x_mm + p.d_y_mm) * p.loss_db_per_mm;
}

double splitter_loss_db(int n_per_pll, const PowerModelParams& p) {
  if (n_per_pll < 1) throw std::invalid_argument("splitter_loss_db: N must be >= 1");
  return p.splitter_loss_db * std::log2(static_cast<double>(n_per_pll)) /
         std::log2(static_cast<double>(p.splitter_ways));
}

double vco_power_w(const PowerModelParams& p) {
  const double dbm = std::abs(p.pn_target_dbchz) +
                     20.0 * std::log10(p.f_lo_hz / p.pn_offset_hz) - p.vco_fom_dbchz;
  return dbm_to_watt(dbm);
}

double distribution_power_w(int n_per_pll, const PowerModelParams& p) {
  check_n(n_per_pll, p);
  // Per-PLL VCO power under the constant-total-power budget: the phase-noise
  // spec of each of the M/N VCOs is relaxed by the VCO count, so its power
  // shrinks by the same factor.
  const double vco_per_pll_dbm =
      watt_to_dbm(vco_power_w(p)) +
      10.0 * std::log10(static_cast<double>(n_per_pll) / p.m_elements);
  const double dbm = vco_per_pll_dbm - 10.0 * std::log10(static_cast<double>(n_per_pll)) +
                     splitter_loss_db(n_per_pll, p) + routing_loss_db(n_per_pll, p) -
                     10.0 * std::log10(p.eta_osc * p.eta_driver);
  return dbm_to_watt(dbm);
}

double total_lo_power_w(int n_per_pll, const PowerModelParams& p) {
  check_n(n_per_pll, p);
  const double pll_w = (static_cast<double>(p.m_elements) / n_per_pll) * p.pll_overhead_w;
  return p.load_w + distribution_power_w(n_per_pll, p) + vco_power_w(p) + pll_w;
}

PowerSweep sweep_power(const PowerModelParams& p) {
  p.validate();
  PowerSweep sweep;
  for (int n = 1; n <= p.m_elements; n *= 2) {
    PowerSweepPoint pt;
    pt.n_per_pll = n;
    pt.distr_w = distribution_power_w(n, p);
    pt.pll_w = (static_cast<double>(p.m_elements) / n) * p.pll_overhead_w;
    pt.vco_w = vco_power_w(p);
    pt.total_w = total_lo_power_w(n, p);
    sweep.points.push_back(pt);
  }
  sweep.argmin_n = sweep.points.front().n_per_pll;
  sweep.min_total_w = sweep.points.front().total_w;
  for (const auto& pt : sweep.points) {
    if (pt.total_w < sweep.min_total_w) {
      sweep.min_total_w = pt.total_w;
      sweep.argmin_n = pt.n_per_pll;
    }
  }
  return sweep;
}

}  // namespace lochain
