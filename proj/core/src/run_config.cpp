// SPDX-License-Identifier: Apache-2.0

#include "lochain/run_config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lochain/units.hpp"

namespace lochain {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& ctx) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const auto& k : allowed)
      if (item.key() == k) ok = true;
    if (!ok) {
      std::string list;
      for (const auto& k : allowed) list += (list.empty() ? "" : ", ") + k;
      fail("unknown key '" + item.key() + "' in " + ctx + " (allowed: " + list + ")");
    }
  }
}

double get_num(const json& j, const std::string& ctx, const std::string& key, double def,
               double lo, double hi) {
  double v = def;
  if (j.contains(key)) {
    if (!j[key].is_number()) fail(ctx + "." + key + " must be a number");
    v = j[key].get<double>();
  }
  if (v < lo || v > hi)
    fail(ctx + "." + key + " (=" + std::to_string(v) + ") must be in [" + std::to_string(lo) +
         ", " + std::to_string(hi) + "]");
  return v;
}

long long get_int(const json& j, const std::string& ctx, const std::string& key, long long def,
                  long long lo, long long hi) {
  long long v = def;
  if (j.contains(key)) {
    if (!j[key].is_number_integer()) fail(ctx + "." + key + " must be an integer");
    v = j[key].get<long long>();
  }
  if (v < lo || v > hi)
    fail(ctx + "." + key + " (=" + std::to_string(v) + ") must be in [" + std::to_string(lo) +
         ", " + std::to_string(hi) + "]");
  return v;
}

bool get_bool(const json& j, const std::string& ctx, const std::string& key, bool def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_boolean()) fail(ctx + "." + key + " must be a boolean");
  return j[key].get<bool>();
}

std::string get_str(const json& j, const std::string& ctx, const std::string& key,
                    const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_string()) fail(ctx + "." + key + " must be a string");
  return j[key].get<std::string>();
}

const json& subobject(const json& j, const std::string& key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j[key].is_object()) fail("'" + key + "' must be an object");
  return j[key];
}

constexpr double kDefaultDamping = 0.70710678118654752;

void parse_lo(const json& j, SimConfig& sim) {
  const std::string ctx = "sim.lo";
  check_keys(j,
             {"n_per_pll", "budget_scaling", "vco_pn_dbchz_at_1mhz", "crystal_floor_dbchz",
              "ref_noise_output_dbchz", "mmw_pll", "if_pll"},
             ctx);
  LoArchitecture& arch = sim.arch;
  arch.n_per_pll = static_cast<int>(get_int(j, ctx, "n_per_pll", 32, 1, 1 << 20));
  arch.budget_scaling = get_bool(j, ctx, "budget_scaling", true);
  const double pn0 = get_num(j, ctx, "vco_pn_dbchz_at_1mhz", -90.0, -250.0, 0.0);
  const double crystal_floor = get_num(j, ctx, "crystal_floor_dbchz", -140.0, -250.0, 0.0);

  const json& jm = subobject(j, "mmw_pll");
  check_keys(jm, {"f_ref_hz", "f_out_hz", "loop_bandwidth_hz", "damping"}, ctx + ".mmw_pll");
  const json& ji = subobject(j, "if_pll");
  check_keys(ji,
             {"enabled", "f_ref_hz", "f_out_hz", "loop_bandwidth_hz", "damping",
              "vco_pn_dbchz_at_1mhz", "dist_floor_dbchz"},
             ctx + ".if_pll");
  const bool if_enabled = get_bool(ji, ctx + ".if_pll", "enabled", true);

  PllParams mmw;
  mmw.f_ref_hz = get_num(jm, ctx + ".mmw_pll", "f_ref_hz", if_enabled ? 5e9 : 100e6, 1.0, 1e12);
  mmw.f_out_hz = get_num(jm, ctx + ".mmw_pll", "f_out_hz", 75e9, 1.0, 1e13);
  mmw.loop_bandwidth_hz = get_num(jm, ctx + ".mmw_pll", "loop_bandwidth_hz", 5e6, 1.0, 1e10);
  mmw.damping = get_num(jm, ctx + ".mmw_pll", "damping", kDefaultDamping, 0.1, 10.0);
  mmw.vco_psd = PhaseNoisePsd::wiener(1e6, pn0);

  if (if_enabled) {
    if (j.contains("ref_noise_output_dbchz") && !j["ref_noise_output_dbchz"].is_null())
      fail(ctx + ".ref_noise_output_dbchz applies only when the IF PLL is disabled (the "
                 "crystal floor sets the reference noise of the IF stage)");
    IfPllStage stage;
    stage.pll.f_ref_hz = get_num(ji, ctx + ".if_pll", "f_ref_hz", 100e6, 1.0, 1e12);
    stage.pll.f_out_hz = get_num(ji, ctx + ".if_pll", "f_out_hz", 5e9, 1.0, 1e12);
    stage.pll.loop_bandwidth_hz =
        get_num(ji, ctx + ".if_pll", "loop_bandwidth_hz", 300e3, 1.0, 1e10);
    stage.pll.damping = get_num(ji, ctx + ".if_pll", "damping", kDefaultDamping, 0.1, 10.0);
    stage.pll.ref_psd = PhaseNoisePsd::white(crystal_floor);
    stage.pll.vco_psd = PhaseNoisePsd::wiener(
        1e6, get_num(ji, ctx + ".if_pll", "vco_pn_dbchz_at_1mhz", -110.0, -250.0, 0.0));
    stage.dist_floor_dbchz = get_num(ji, ctx + ".if_pll", "dist_floor_dbchz", -135.0, -250.0, 0.0);
    if (stage.pll.f_out_hz != mmw.f_ref_hz)
      fail(ctx + ".if_pll.f_out_hz (=" + std::to_string(stage.pll.f_out_hz) +
           ") must equal sim.lo.mmw_pll.f_ref_hz (=" + std::to_string(mmw.f_ref_hz) + ")");
    mmw.ref_psd = PhaseNoisePsd::none();
    arch.if_pll = stage;
  } else {
    arch.if_pll.reset();
    if (j.contains("ref_noise_output_dbchz") && !j["ref_noise_output_dbchz"].is_null()) {
      const double out_level = get_num(j, ctx, "ref_noise_output_dbchz", -85.0, -250.0, 0.0);
      const double to_input = -20.0 * std::log10(mmw.f_out_hz / mmw.f_ref_hz);
      mmw.ref_psd = PhaseNoisePsd::white(out_level + to_input);
    } else {
      mmw.ref_psd = PhaseNoisePsd::white(crystal_floor);
    }
  }
  arch.mmw_pll = mmw;
}

void parse_sim(const json& j, RunConfig& cfg) {
  const std::string ctx = "sim";
  check_keys(j,
             {"symbol_rate_hz", "constellation", "m_elements", "k_users", "user_separation_deg",
              "element_spacing_wavelengths", "beamformer", "epoch_s", "n_symbols", "n_trials",
              "thermal_snr_db", "phase_noise", "cr", "lo"},
             ctx);
  SimConfig& sim = cfg.sim;
  sim.symbol_rate_hz = get_num(j, ctx, "symbol_rate_hz", 2e9, 1.0, 1e12);
  sim.constellation = constellation_from_name(get_str(j, ctx, "constellation", "qpsk"));
  sim.arch.m_elements = static_cast<int>(get_int(j, ctx, "m_elements", 128, 1, 1 << 20));
  sim.k_users = static_cast<int>(get_int(j, ctx, "k_users", 16, 1, 4096));
  sim.user_separation_deg = get_num(j, ctx, "user_separation_deg", 10.0, 0.0, 180.0);
  sim.element_spacing_wl = get_num(j, ctx, "element_spacing_wavelengths", 0.5, 0.01, 10.0);
  const std::string bf = get_str(j, ctx, "beamformer", "auto");
  if (bf == "auto")
    sim.beamformer.reset();
  else if (bf == "zf")
    sim.beamformer = BeamformerKind::zero_forcing;
  else if (bf == "conjugate")
    sim.beamformer = BeamformerKind::conjugate;
  else
    fail("sim.beamformer must be one of auto|zf|conjugate");
  sim.epoch_s = get_num(j, ctx, "epoch_s", 1e-4, 1e-12, 1.0);
  sim.n_symbols = static_cast<std::size_t>(get_int(j, ctx, "n_symbols", 200000, 1, 1LL << 40));
  sim.n_trials = static_cast<int>(get_int(j, ctx, "n_trials", 10, 1, 1 << 20));
  if (j.contains("thermal_snr_db") && !j["thermal_snr_db"].is_null())
    sim.thermal_snr_db = get_num(j, ctx, "thermal_snr_db", 0.0, -100.0, 300.0);
  else
    sim.thermal_snr_db.reset();
  sim.phase_noise = get_bool(j, ctx, "phase_noise", true);

  const json& jc = subobject(j, "cr");
  check_keys(jc, {"bandwidth_hz", "damping"}, ctx + ".cr");
  sim.cr.bandwidth_hz = get_num(jc, ctx + ".cr", "bandwidth_hz", 10e6, 1.0, 1e10);
  sim.cr.damping = get_num(jc, ctx + ".cr", "damping", kDefaultDamping, 0.1, 10.0);

  parse_lo(subobject(j, "lo"), sim);

  if (sim.arch.m_elements % sim.arch.n_per_pll != 0)
    fail("sim.lo.n_per_pll (=" + std::to_string(sim.arch.n_per_pll) + ") must divide sim.m_elements (=" +
         std::to_string(sim.arch.m_elements) + ")");
}

void parse_power(const json& j, RunConfig& cfg) {
  const std::string ctx = "power";
  check_keys(j,
             {"m_elements", "d_x_mm", "d_y_mm", "loss_db_per_mm", "splitter_loss_db",
              "splitter_ways", "vco_fom_dbchz", "pn_target_dbchz", "pn_offset_hz", "f_lo_hz",
              "eta_osc", "eta_driver", "pll_overhead_w", "load_w"},
             ctx);
  PowerModelParams& p = cfg.power;
  p.m_elements = static_cast<int>(get_int(j, ctx, "m_elements", 128, 1, 1 << 20));
  // Default panel dimensions follow the 128-element 64 mm x 32 mm reference
  // design at fixed element pitch (area proportional to element count).
  const double dim_scale = std::sqrt(static_cast<double>(p.m_elements) / 128.0);
  p.d_x_mm = get_num(j, ctx, "d_x_mm", 64.0 * dim_scale, 0.0, 1e5);
  p.d_y_mm = get_num(j, ctx, "d_y_mm", 32.0 * dim_scale, 0.0, 1e5);
  p.loss_db_per_mm = get_num(j, ctx, "loss_db_per_mm", 0.2, 0.0, 100.0);
  p.splitter_loss_db = get_num(j, ctx, "splitter_loss_db", 1.5, 0.0, 100.0);
  p.splitter_ways = static_cast<int>(get_int(j, ctx, "splitter_ways", 4, 2, 64));
  p.vco_fom_dbchz = get_num(j, ctx, "vco_fom_dbchz", 180.0, 0.0, 300.0);
  p.pn_target_dbchz = get_num(j, ctx, "pn_target_dbchz", -90.0, -250.0, 0.0);
  p.pn_offset_hz = get_num(j, ctx, "pn_offset_hz", 1e6, 1.0, 1e12);
  p.f_lo_hz = get_num(j, ctx, "f_lo_hz", 75e9, 1.0, 1e13);
  p.eta_osc = get_num(j, ctx, "eta_osc", 0.2, 1e-6, 1.0);
  p.eta_driver = get_num(j, ctx, "eta_driver", 0.2, 1e-6, 1.0);
  p.pll_overhead_w = get_num(j, ctx, "pll_overhead_w", 2e-3, 0.0, 1e3);
  p.load_w = get_num(j, ctx, "load_w", 0.0, 0.0, 1e3);
  p.validate();
}

LinkColumn make_link_column(const std::string& label, double bw, double nf, double carrier,
                            double exponent, double dist, double snr, int bs, int ue) {
  LinkColumn c;
  c.budget.label = label;
  c.budget.bandwidth_hz = bw;
  c.budget.rx_nf_db = nf;
  c.budget.carrier_hz = carrier;
  c.budget.loss_exponent = exponent;
  c.budget.distance_m = dist;
  c.budget.target_snr_db = snr;
  c.bs_elements = bs;
  c.ue_elements = ue;
  c.budget.bs_gain_db = array_gain_db(bs);
  c.budget.ue_gain_db = array_gain_db(ue);
  return c;
}

void parse_link(const json& j, RunConfig& cfg) {
  const std::string ctx = "link";
  check_keys(j, {"columns"}, ctx);
  cfg.link_columns.clear();
  if (!j.contains("columns")) {
    // The three reference budgets: an RF baseline and a mm-wave link with and
    // without array gain.
    cfg.link_columns.push_back(
        make_link_column("rf", 20e6, 5.0, 2.5e9, 2.9, 100.0, 26.0, 1, 1));
    cfg.link_columns.push_back(
        make_link_column("mmw_no_gain", 2e9, 5.0, 60e9, 2.2, 100.0, 26.0, 1, 1));
    cfg.link_columns.push_back(
        make_link_column("mmw_arrays", 2e9, 5.0, 60e9, 2.2, 100.0, 26.0, 128, 16));
    return;
  }
  if (!j["columns"].is_array()) fail("link.columns must be an array");
  int idx = 0;
  for (const auto& cj : j["columns"]) {
    const std::string cctx = ctx + ".columns[" + std::to_string(idx++) + "]";
    check_keys(cj,
               {"label", "bandwidth_hz", "rx_nf_db", "carrier_hz", "loss_exponent", "distance_m",
                "target_snr_db", "bs_elements", "ue_elements"},
               cctx);
    LinkColumn c = make_link_column(
        get_str(cj, cctx, "label", "link" + std::to_string(idx)),
        get_num(cj, cctx, "bandwidth_hz", 2e9, 1.0, 1e12),
        get_num(cj, cctx, "rx_nf_db", 5.0, 0.0, 50.0),
        get_num(cj, cctx, "carrier_hz", 60e9, 1e6, 1e13),
        get_num(cj, cctx, "loss_exponent", 2.2, 1.5, 6.0),
        get_num(cj, cctx, "distance_m", 100.0, 1.0, 1e6),
        get_num(cj, cctx, "target_snr_db", 26.0, -50.0, 100.0),
        static_cast<int>(get_int(cj, cctx, "bs_elements", 1, 1, 1 << 20)),
        static_cast<int>(get_int(cj, cctx, "ue_elements", 1, 1, 1 << 20)));
    c.budget.validate();
    cfg.link_columns.push_back(c);
  }
}

void parse_sweep(const json& j, RunConfig& cfg) {
  const std::string ctx = "sweep";
  check_keys(j,
             {"pll_bandwidths_hz", "ref_levels_output_dbchz", "k_users", "n_per_pll",
              "thermal_snrs_db", "constellations", "cr_policy"},
             ctx);
  auto get_doubles = [&](const char* key, std::vector<double> def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_array()) fail(ctx + "." + std::string(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j[key]) {
      if (!v.is_number()) fail(ctx + "." + std::string(key) + " must contain only numbers");
      out.push_back(v.get<double>());
    }
    if (out.empty()) fail(ctx + "." + std::string(key) + " must not be empty");
    return out;
  };
  auto get_ints = [&](const char* key, std::vector<int> def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_array()) fail(ctx + "." + std::string(key) + " must be an array of integers");
    std::vector<int> out;
    for (const auto& v : j[key]) {
      if (!v.is_number_integer()) fail(ctx + "." + std::string(key) + " must contain only integers");
      out.push_back(v.get<int>());
    }
    if (out.empty()) fail(ctx + "." + std::string(key) + " must not be empty");
    return out;
  };

  cfg.sweep.pll_bandwidths_hz =
      get_doubles("pll_bandwidths_hz", {0.125e6, 0.25e6, 0.5e6, 1e6, 2e6, 4e6, 8e6});
  cfg.sweep.ref_levels_output_dbchz = get_doubles("ref_levels_output_dbchz", {-85.0, -95.0, -105.0});
  cfg.sweep.k_users = get_ints("k_users", {1, 2, 4, 8, 16});
  std::vector<int> default_n;
  for (int n = 1; n <= cfg.sim.arch.m_elements; n *= 2) default_n.push_back(n);
  cfg.sweep.n_per_pll = get_ints("n_per_pll", default_n);
  cfg.sweep.thermal_snrs_db = get_doubles("thermal_snrs_db", {5, 10, 15, 20, 25, 30, 35});

  cfg.sweep.constellations.clear();
  if (j.contains("constellations")) {
    if (!j["constellations"].is_array()) fail("sweep.constellations must be an array of strings");
    for (const auto& v : j["constellations"]) {
      if (!v.is_string()) fail("sweep.constellations must contain only strings");
      cfg.sweep.constellations.push_back(constellation_from_name(v.get<std::string>()));
    }
    if (cfg.sweep.constellations.empty()) fail("sweep.constellations must not be empty");
  } else {
    cfg.sweep.constellations = {ConstellationKind::qpsk, ConstellationKind::qam16,
                                ConstellationKind::qam64, ConstellationKind::qam256};
  }

  if (j.contains("cr_policy")) {
    if (!j["cr_policy"].is_array()) fail("sweep.cr_policy must be an array");
    cfg.cr_policy.entries.clear();
    int idx = 0;
    for (const auto& ej : j["cr_policy"]) {
      const std::string ectx = "sweep.cr_policy[" + std::to_string(idx++) + "]";
      check_keys(ej, {"min_snr_db", "bandwidth_hz"}, ectx);
      CrBandwidthPolicy::Entry e;
      e.min_snr_db = get_num(ej, ectx, "min_snr_db", 0.0, -300.0, 300.0);
      e.bandwidth_hz = get_num(ej, ectx, "bandwidth_hz", 1e6, 1.0, 1e10);
      cfg.cr_policy.entries.push_back(e);
    }
    if (cfg.cr_policy.entries.empty()) fail("sweep.cr_policy must not be empty");
  } else {
    cfg.cr_policy = CrBandwidthPolicy::default_policy();
  }
}

json lo_to_json(const SimConfig& sim) {
  const LoArchitecture& arch = sim.arch;
  json j;
  j["n_per_pll"] = arch.n_per_pll;
  j["budget_scaling"] = arch.budget_scaling;
  j["vco_pn_dbchz_at_1mhz"] = arch.mmw_pll.vco_psd.f2_anchor->level_dbchz;
  json jm;
  jm["f_ref_hz"] = arch.mmw_pll.f_ref_hz;
  jm["f_out_hz"] = arch.mmw_pll.f_out_hz;
  jm["loop_bandwidth_hz"] = arch.mmw_pll.loop_bandwidth_hz;
  jm["damping"] = arch.mmw_pll.damping;
  j["mmw_pll"] = jm;
  if (arch.if_pll) {
    json ji;
    ji["enabled"] = true;
    ji["f_ref_hz"] = arch.if_pll->pll.f_ref_hz;
    ji["f_out_hz"] = arch.if_pll->pll.f_out_hz;
    ji["loop_bandwidth_hz"] = arch.if_pll->pll.loop_bandwidth_hz;
    ji["damping"] = arch.if_pll->pll.damping;
    ji["vco_pn_dbchz_at_1mhz"] = arch.if_pll->pll.vco_psd.f2_anchor->level_dbchz;
    ji["dist_floor_dbchz"] = arch.if_pll->dist_floor_dbchz;
    j["if_pll"] = ji;
    j["crystal_floor_dbchz"] = *arch.if_pll->pll.ref_psd.white_floor_dbchz;
  } else {
    j["if_pll"] = json{{"enabled", false}};
    if (arch.mmw_pll.ref_psd.white_floor_dbchz)
      j["ref_floor_input_dbchz"] = *arch.mmw_pll.ref_psd.white_floor_dbchz;
  }
  return j;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["experiment"] = experiment_name(cfg.experiment);
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  j["out_dir"] = cfg.out_dir;

  json js;
  js["symbol_rate_hz"] = cfg.sim.symbol_rate_hz;
  js["constellation"] = constellation_name(cfg.sim.constellation);
  js["m_elements"] = cfg.sim.arch.m_elements;
  js["k_users"] = cfg.sim.k_users;
  js["user_separation_deg"] = cfg.sim.user_separation_deg;
  js["element_spacing_wavelengths"] = cfg.sim.element_spacing_wl;
  js["beamformer"] = !cfg.sim.beamformer ? "auto"
                     : (*cfg.sim.beamformer == BeamformerKind::zero_forcing ? "zf" : "conjugate");
  js["epoch_s"] = cfg.sim.epoch_s;
  js["n_symbols"] = cfg.sim.n_symbols;
  js["n_trials"] = cfg.sim.n_trials;
  if (cfg.sim.thermal_snr_db)
    js["thermal_snr_db"] = *cfg.sim.thermal_snr_db;
  else
    js["thermal_snr_db"] = nullptr;
  js["phase_noise"] = cfg.sim.phase_noise;
  js["cr"] = json{{"bandwidth_hz", cfg.sim.cr.bandwidth_hz}, {"damping", cfg.sim.cr.damping}};
  js["lo"] = lo_to_json(cfg.sim);
  j["sim"] = js;

  json jp;
  jp["m_elements"] = cfg.power.m_elements;
  jp["d_x_mm"] = cfg.power.d_x_mm;
  jp["d_y_mm"] = cfg.power.d_y_mm;
  jp["loss_db_per_mm"] = cfg.power.loss_db_per_mm;
  jp["splitter_loss_db"] = cfg.power.splitter_loss_db;
  jp["splitter_ways"] = cfg.power.splitter_ways;
  jp["vco_fom_dbchz"] = cfg.power.vco_fom_dbchz;
  jp["pn_target_dbchz"] = cfg.power.pn_target_dbchz;
  jp["pn_offset_hz"] = cfg.power.pn_offset_hz;
  jp["f_lo_hz"] = cfg.power.f_lo_hz;
  jp["eta_osc"] = cfg.power.eta_osc;
  jp["eta_driver"] = cfg.power.eta_driver;
  jp["pll_overhead_w"] = cfg.power.pll_overhead_w;
  jp["load_w"] = cfg.power.load_w;
  j["power"] = jp;

  json jl = json::array();
  for (const auto& c : cfg.link_columns) {
    json cj;
    cj["label"] = c.budget.label;
    cj["bandwidth_hz"] = c.budget.bandwidth_hz;
    cj["rx_nf_db"] = c.budget.rx_nf_db;
    cj["carrier_hz"] = c.budget.carrier_hz;
    cj["loss_exponent"] = c.budget.loss_exponent;
    cj["distance_m"] = c.budget.distance_m;
    cj["target_snr_db"] = c.budget.target_snr_db;
    cj["bs_elements"] = c.bs_elements;
    cj["ue_elements"] = c.ue_elements;
    jl.push_back(cj);
  }
  j["link"] = json{{"columns", jl}};

  json jw;
  jw["pll_bandwidths_hz"] = cfg.sweep.pll_bandwidths_hz;
  jw["ref_levels_output_dbchz"] = cfg.sweep.ref_levels_output_dbchz;
  jw["k_users"] = cfg.sweep.k_users;
  jw["n_per_pll"] = cfg.sweep.n_per_pll;
  jw["thermal_snrs_db"] = cfg.sweep.thermal_snrs_db;
  json jcs = json::array();
  for (auto kind : cfg.sweep.constellations) jcs.push_back(constellation_name(kind));
  jw["constellations"] = jcs;
  json jpol = json::array();
  for (const auto& e : cfg.cr_policy.entries)
    jpol.push_back(json{{"min_snr_db", e.min_snr_db}, {"bandwidth_hz", e.bandwidth_hz}});
  jw["cr_policy"] = jpol;
  j["sweep"] = jw;
  return j;
}

}  // namespace

ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "power-sweep") return ExperimentKind::power_sweep;
  if (name == "link-budget") return ExperimentKind::link_budget;
  if (name == "pll-bw-sweep") return ExperimentKind::pll_bw_sweep;
  if (name == "user-sweep") return ExperimentKind::user_sweep;
  if (name == "subarray-sweep") return ExperimentKind::subarray_sweep;
  if (name == "ber-curve") return ExperimentKind::ber_curve;
  if (name == "single-run") return ExperimentKind::single_run;
  fail("unknown experiment '" + name +
       "' (expected power-sweep|link-budget|pll-bw-sweep|user-sweep|subarray-sweep|ber-curve|"
       "single-run)");
}

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::power_sweep: return "power-sweep";
    case ExperimentKind::link_budget: return "link-budget";
    case ExperimentKind::pll_bw_sweep: return "pll-bw-sweep";
    case ExperimentKind::user_sweep: return "user-sweep";
    case ExperimentKind::subarray_sweep: return "subarray-sweep";
    case ExperimentKind::ber_curve: return "ber-curve";
    case ExperimentKind::single_run: return "single-run";
  }
  return "?";
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void canonicalize(RunConfig& cfg) {
  cfg.canonical_json = config_to_json(cfg).dump();
  cfg.config_hash = fnv1a_hex(cfg.canonical_json);
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  std::string trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
  if (trimmed.empty()) {
    j = json::object();
  } else {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      fail(std::string("invalid JSON: ") + e.what());
    }
  }
  if (!j.is_object()) fail("top-level document must be a JSON object");
  check_keys(j, {"experiment", "seed", "jobs", "out_dir", "sim", "power", "link", "sweep"}, "top level");

  RunConfig cfg;
  cfg.experiment = experiment_from_name(get_str(j, "top level", "experiment", "single-run"));
  cfg.seed = static_cast<std::uint64_t>(
      get_int(j, "top level", "seed", 1, 0, std::numeric_limits<long long>::max()));
  cfg.jobs = static_cast<int>(get_int(j, "top level", "jobs", 1, 1, 4096));
  cfg.out_dir = get_str(j, "top level", "out_dir", "out");
  if (const char* env = std::getenv("LOCHAIN_OUT_DIR"); env && *env) cfg.out_dir = env;

  parse_sim(subobject(j, "sim"), cfg);
  parse_power(subobject(j, "power"), cfg);
  parse_link(subobject(j, "link"), cfg);
  parse_sweep(subobject(j, "sweep"), cfg);

  cfg.sim.seed = cfg.seed;
  cfg.sim.jobs = cfg.jobs;
  cfg.sim.validate();
  for (int n : cfg.sweep.n_per_pll)
    if (n < 1 || cfg.sim.arch.m_elements % n != 0)
      fail("sweep.n_per_pll entry (=" + std::to_string(n) + ") must divide sim.m_elements (=" +
           std::to_string(cfg.sim.arch.m_elements) + ")");
  for (int k : cfg.sweep.k_users)
    if (k < 1 || k > cfg.sim.arch.m_elements)
      fail("sweep.k_users entry (=" + std::to_string(k) + ") must be in [1, m_elements]");

  canonicalize(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace lochain
