// SPDX-License-Identifier: Apache-2.0

#include "lochain/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lochain/csv.hpp"
#include "lochain/units.hpp"

namespace lochain {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt_db(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

/// Apply an output-referred white reference level to a direct-conversion
/// (non-IF) simulation config.
void set_output_referred_ref(SimConfig& sim, double level_dbchz) {
  const double to_input =
      -20.0 * std::log10(sim.arch.mmw_pll.f_out_hz / sim.arch.mmw_pll.f_ref_hz);
  sim.arch.mmw_pll.ref_psd = PhaseNoisePsd::white(level_dbchz + to_input);
}

struct Emitter {
  const RunConfig& cfg;
  CsvTable table;
  json results = json::array();

  Emitter(const RunConfig& c, std::vector<std::string> columns)
      : cfg(c), table([&] {
          std::vector<std::string> header{"run_id", "seed"};
          header.insert(header.end(), columns.begin(), columns.end());
          return header;
        }()) {}

  void row(const std::vector<std::string>& cells, const json& record) {
    std::vector<std::string> full{cfg.config_hash, std::to_string(cfg.seed)};
    full.insert(full.end(), cells.begin(), cells.end());
    table.add_row(full);
    results.push_back(record);
  }
};

json metrics_record(const SimMetrics& m) {
  json r;
  r["sinr_db"] = m.sinr_db;
  r["sinr_ci95_db"] = m.sinr_ci95_db;
  r["evm"] = m.evm;
  r["ber"] = m.ber;
  r["static_gain"] = m.static_gain;
  r["gain_var"] = m.gain_var;
  r["resid_phase_var"] = m.resid_phase_var;
  r["lock_lost"] = m.lock_lost;
  return r;
}

std::vector<std::string> metrics_cells(const SimMetrics& m) {
  return {format_double(m.sinr_db), format_double(m.sinr_ci95_db), format_double(m.evm),
          format_double(m.ber),     format_double(m.static_gain),  format_double(m.gain_var),
          format_double(m.resid_phase_var), m.lock_lost ? "1" : "0"};
}

const std::vector<std::string> kMetricColumns = {
    "sinr_db", "sinr_ci95_db", "evm", "ber", "static_gain", "gain_var", "resid_phase_var",
    "lock_lost"};

std::vector<std::string> with_prefix(std::vector<std::string> prefix) {
  prefix.insert(prefix.end(), kMetricColumns.begin(), kMetricColumns.end());
  return prefix;
}

}  // namespace

std::string render_link_budget_text(const std::vector<LinkColumn>& columns) {
  std::ostringstream ss;
  auto line = [&](const std::string& name, auto value_of) {
    ss << std::left << std::setw(34) << name;
    for (const auto& c : columns) ss << std::right << std::setw(14) << value_of(c);
    ss << '\n';
  };
  line("", [](const LinkColumn& c) { return c.budget.label; });
  line("Bandwidth (MHz)",
       [](const LinkColumn& c) { return fmt_db(c.budget.bandwidth_hz / 1e6); });
  line("Rx NF (dB)", [](const LinkColumn& c) { return fmt_db(c.budget.rx_nf_db); });
  line("Input referred noise power (dBm)", [](const LinkColumn& c) {
    return fmt_db(noise_power_dbm(c.budget.bandwidth_hz, c.budget.rx_nf_db));
  });
  line("Carrier freq (GHz)",
       [](const LinkColumn& c) { return fmt_db(c.budget.carrier_hz / 1e9); });
  line("Loss exponent", [](const LinkColumn& c) { return fmt_db(c.budget.loss_exponent); });
  line("Loss (dB)", [](const LinkColumn& c) {
    return fmt_db(path_loss_db(c.budget.carrier_hz, c.budget.distance_m, c.budget.loss_exponent));
  });
  line("Rx SNR (dB)", [](const LinkColumn& c) { return fmt_db(c.budget.target_snr_db); });
  line("BS antenna gain (dB)", [](const LinkColumn& c) { return fmt_db(c.budget.bs_gain_db); });
  line("UE antenna gain (dB)", [](const LinkColumn& c) { return fmt_db(c.budget.ue_gain_db); });
  line("UE radiated Tx power (dBm)",
       [](const LinkColumn& c) { return fmt_db(required_tx_power_dbm(c.budget)); });
  return ss.str();
}

namespace {

ExperimentResult run_power_sweep(const RunConfig& cfg, Emitter& em) {
  const PowerSweep sweep = sweep_power(cfg.power);
  for (const auto& pt : sweep.points) {
    const bool best = pt.n_per_pll == sweep.argmin_n;
    em.row({std::to_string(pt.n_per_pll), format_double(pt.distr_w), format_double(pt.pll_w),
            format_double(pt.vco_w), format_double(pt.total_w), best ? "1" : "0"},
           json{{"n_per_pll", pt.n_per_pll},
                {"p_distr_w", pt.distr_w},
                {"p_pll_w", pt.pll_w},
                {"p_vco_w", pt.vco_w},
                {"total_w", pt.total_w},
                {"is_argmin", best}});
  }
  ExperimentResult res;
  std::ostringstream d;
  d << "power-sweep: M=" << cfg.power.m_elements << ", optimum N=" << sweep.argmin_n << " at "
    << fmt_db(sweep.min_total_w * 1e3) << " mW";
  res.digest = d.str();
  return res;
}

ExperimentResult run_link_budget(const RunConfig& cfg, Emitter& em) {
  for (const auto& c : cfg.link_columns) {
    const double noise = noise_power_dbm(c.budget.bandwidth_hz, c.budget.rx_nf_db);
    const double loss =
        path_loss_db(c.budget.carrier_hz, c.budget.distance_m, c.budget.loss_exponent);
    const double tx = required_tx_power_dbm(c.budget);
    em.row({c.budget.label, format_double(c.budget.bandwidth_hz), format_double(c.budget.rx_nf_db),
            format_double(noise), format_double(c.budget.carrier_hz),
            format_double(c.budget.loss_exponent), format_double(c.budget.distance_m),
            format_double(loss), format_double(c.budget.target_snr_db),
            format_double(c.budget.bs_gain_db), format_double(c.budget.ue_gain_db),
            format_double(tx)},
           json{{"label", c.budget.label},
                {"noise_power_dbm", noise},
                {"path_loss_db", loss},
                {"tx_power_dbm", tx}});
  }
  ExperimentResult res;
  res.digest = "link-budget: " + std::to_string(cfg.link_columns.size()) + " columns";
  return res;
}

ExperimentResult run_pll_bw_sweep(const RunConfig& cfg, Emitter& em) {
  ExperimentResult res;
  std::ostringstream digest;
  digest << "pll-bw-sweep:";
  const bool direct = !cfg.sim.arch.if_pll.has_value();
  const std::vector<double> levels =
      direct ? cfg.sweep.ref_levels_output_dbchz : std::vector<double>{std::nan("")};
  for (double level : levels) {
    SimConfig sim = cfg.sim;
    if (direct) set_output_referred_ref(sim, level);
    const auto curve = sweep_pll_bandwidth(sim, cfg.sweep.pll_bandwidths_hz);
    double best_bw = curve.front().x;
    double best_sinr = curve.front().metrics.sinr_db;
    for (const auto& pt : curve) {
      if (pt.metrics.sinr_db > best_sinr) {
        best_sinr = pt.metrics.sinr_db;
        best_bw = pt.x;
      }
      std::vector<std::string> cells{direct ? format_double(level) : "if-pll",
                                     format_double(pt.x)};
      auto mc = metrics_cells(pt.metrics);
      cells.insert(cells.end(), mc.begin(), mc.end());
      json rec = metrics_record(pt.metrics);
      rec["ref_level_output_dbchz"] = direct ? json(level) : json("if-pll");
      rec["pll_bandwidth_hz"] = pt.x;
      em.row(cells, rec);
    }
    digest << ' ' << (direct ? fmt_db(level) : std::string("if-pll")) << "->argmax "
           << format_double(best_bw) << " Hz (" << fmt_db(best_sinr) << " dB)";
  }
  res.digest = digest.str();
  return res;
}

ExperimentResult run_user_sweep(const RunConfig& cfg, Emitter& em) {
  const auto curve = sweep_users(cfg.sim, cfg.sweep.k_users);
  const double gamma = architecture_gamma(cfg.sim.arch);
  const double n_t = cfg.sim.thermal_snr_db ? db_to_linear(-*cfg.sim.thermal_snr_db) : 0.0;
  const SinrModelFit fit = fit_sinr_model(curve, gamma, n_t);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& pt = curve[i];
    std::vector<std::string> cells{std::to_string(static_cast<int>(pt.x)),
                                   fit.valid ? format_double(fit.model_sinr_db[i]) : ""};
    auto mc = metrics_cells(pt.metrics);
    cells.insert(cells.end(), mc.begin(), mc.end());
    json rec = metrics_record(pt.metrics);
    rec["k_users"] = static_cast<int>(pt.x);
    if (fit.valid) rec["model_sinr_db"] = fit.model_sinr_db[i];
    em.row(cells, rec);
  }
  ExperimentResult res;
  std::ostringstream d;
  d << "user-sweep: gamma=" << fmt_db(gamma);
  if (fit.valid)
    d << ", alpha=" << fmt_db(fit.alpha) << ", max model residual " << fmt_db(fit.max_residual_db)
      << " dB";
  else
    d << ", alpha undefined (degenerate fit)";
  res.digest = d.str();
  return res;
}

ExperimentResult run_subarray_sweep(const RunConfig& cfg, Emitter& em) {
  const auto curve = sweep_subarray(cfg.sim, cfg.sweep.n_per_pll);
  for (const auto& pt : curve) {
    LoArchitecture arch = cfg.sim.arch;
    arch.n_per_pll = static_cast<int>(pt.x);
    const double gamma = architecture_gamma(arch);
    std::vector<std::string> cells{std::to_string(static_cast<int>(pt.x)), format_double(gamma)};
    auto mc = metrics_cells(pt.metrics);
    cells.insert(cells.end(), mc.begin(), mc.end());
    json rec = metrics_record(pt.metrics);
    rec["n_per_pll"] = static_cast<int>(pt.x);
    rec["gamma"] = gamma;
    em.row(cells, rec);
  }
  ExperimentResult res;
  res.digest = "subarray-sweep: " + std::to_string(curve.size()) + " points";
  return res;
}

ExperimentResult run_ber_curve(const RunConfig& cfg, Emitter& em) {
  const auto pts = ber_curve(cfg.sim, cfg.sweep.thermal_snrs_db, cfg.sweep.constellations,
                             cfg.cr_policy);
  for (const auto& pt : pts) {
    em.row({constellation_name(pt.constellation), format_double(pt.snr_db),
            format_double(pt.cr_bandwidth_hz), format_double(pt.ber_with_pn),
            format_double(pt.ber_without_pn), format_double(pt.sinr_with_pn_db),
            format_double(pt.sinr_without_pn_db), pt.lock_lost ? "1" : "0"},
           json{{"constellation", constellation_name(pt.constellation)},
                {"thermal_snr_db", pt.snr_db},
                {"cr_bandwidth_hz", pt.cr_bandwidth_hz},
                {"ber_with_pn", pt.ber_with_pn},
                {"ber_without_pn", pt.ber_without_pn},
                {"sinr_with_pn_db", pt.sinr_with_pn_db},
                {"sinr_without_pn_db", pt.sinr_without_pn_db},
                {"lock_lost", pt.lock_lost}});
  }
  ExperimentResult res;
  res.digest = "ber-curve: " + std::to_string(pts.size()) + " points";
  return res;
}

ExperimentResult run_single(const RunConfig& cfg, Emitter& em) {
  const SimMetrics m = run_uplink(cfg.sim);
  {
    std::vector<std::string> cells{"all"};
    auto mc = metrics_cells(m);
    cells.insert(cells.end(), mc.begin(), mc.end());
    json rec = metrics_record(m);
    rec["user"] = "all";
    em.row(cells, rec);
  }
  for (std::size_t u = 0; u < m.per_user.size(); ++u) {
    const auto& pu = m.per_user[u];
    SimMetrics as_metrics;
    as_metrics.sinr_db = pu.sinr_db;
    as_metrics.evm = pu.evm;
    as_metrics.ber = pu.ber;
    as_metrics.static_gain = pu.static_gain;
    as_metrics.gain_var = pu.gain_var;
    as_metrics.resid_phase_var = pu.resid_phase_var;
    as_metrics.lock_lost = m.lock_lost;
    std::vector<std::string> cells{std::to_string(u)};
    auto mc = metrics_cells(as_metrics);
    cells.insert(cells.end(), mc.begin(), mc.end());
    json rec = metrics_record(as_metrics);
    rec["user"] = u;
    em.row(cells, rec);
  }
  ExperimentResult res;
  std::ostringstream d;
  d << "single-run: SINR " << fmt_db(m.sinr_db) << " dB (±" << fmt_db(m.sinr_ci95_db)
    << "), BER " << format_double(m.ber) << (m.lock_lost ? ", CR lock lost" : "");
  res.digest = d.str();
  return res;
}

std::vector<std::string> columns_for(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::power_sweep:
      return {"n_per_pll", "p_distr_w", "p_pll_w", "p_vco_w", "total_w", "is_argmin"};
    case ExperimentKind::link_budget:
      return {"label", "bandwidth_hz", "rx_nf_db", "noise_power_dbm", "carrier_hz",
              "loss_exponent", "distance_m", "path_loss_db", "target_snr_db", "bs_gain_db",
              "ue_gain_db", "tx_power_dbm"};
    case ExperimentKind::pll_bw_sweep:
      return with_prefix({"ref_level_output_dbchz", "pll_bandwidth_hz"});
    case ExperimentKind::user_sweep:
      return with_prefix({"k_users", "model_sinr_db"});
    case ExperimentKind::subarray_sweep:
      return with_prefix({"n_per_pll", "gamma"});
    case ExperimentKind::ber_curve:
      return {"constellation", "thermal_snr_db", "cr_bandwidth_hz", "ber_with_pn",
              "ber_without_pn", "sinr_with_pn_db", "sinr_without_pn_db", "lock_lost"};
    case ExperimentKind::single_run:
      return with_prefix({"user"});
  }
  return {};
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg) {
  Emitter em(cfg, columns_for(cfg.experiment));
  ExperimentResult res;
  switch (cfg.experiment) {
    case ExperimentKind::power_sweep: res = run_power_sweep(cfg, em); break;
    case ExperimentKind::link_budget: res = run_link_budget(cfg, em); break;
    case ExperimentKind::pll_bw_sweep: res = run_pll_bw_sweep(cfg, em); break;
    case ExperimentKind::user_sweep: res = run_user_sweep(cfg, em); break;
    case ExperimentKind::subarray_sweep: res = run_subarray_sweep(cfg, em); break;
    case ExperimentKind::ber_curve: res = run_ber_curve(cfg, em); break;
    case ExperimentKind::single_run: res = run_single(cfg, em); break;
  }

  const std::string name = experiment_name(cfg.experiment);
  fs::create_directories(cfg.out_dir);
  const fs::path marker = fs::path(cfg.out_dir) / (name + ".incomplete");
  write_file(marker.string(), "experiment in progress\n");

  const fs::path csv_path = fs::path(cfg.out_dir) / (name + ".csv");
  write_file(csv_path.string(), em.table.to_string());
  res.files_written.push_back(csv_path.string());

  json summary;
  summary["experiment"] = name;
  summary["run_id"] = cfg.config_hash;
  summary["config_hash"] = cfg.config_hash;
  summary["seed"] = cfg.seed;
  summary["digest"] = res.digest;
  summary["config"] = json::parse(cfg.canonical_json);
  summary["results"] = em.results;
  const fs::path json_path = fs::path(cfg.out_dir) / (name + "_summary.json");
  write_file(json_path.string(), summary.dump(2) + "\n");
  res.files_written.push_back(json_path.string());

  fs::remove(marker);
  return res;
}

}  // namespace lochain
