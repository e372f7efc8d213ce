// SPDX-License-Identifier: Apache-2.0

#include "lochain/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <thread>

#include "lochain/units.hpp"

namespace lochain {

namespace {

constexpr std::size_t kBlockSymbols = 8192;
constexpr double kSinrCapLinear = 1e10;  // 100 dB
constexpr int kLockBurstLength = 100;    // consecutive symbol errors -> lost lock

struct ScalarFitAccum {
  std::complex<double> sum_xy{0.0, 0.0};  // rx * conj(tx)
  double sum_xx = 0.0;                    // |tx|^2
  double sum_yy = 0.0;                    // |rx|^2
  std::uint64_t n = 0;

  void add(std::complex<double> rx, std::complex<double> tx) {
    sum_xy += rx * std::conj(tx);
    sum_xx += std::norm(tx);
    sum_yy += std::norm(rx);
    ++n;
  }

  double sinr_linear() const {
    if (n == 0 || sum_xx <= 0.0) return 0.0;
    const std::complex<double> a = sum_xy / sum_xx;
    const double sig = std::norm(a) * sum_xx;
    const double err = sum_yy - sig;
    if (!(err > 0.0)) return kSinrCapLinear;
    return std::min(sig / err, kSinrCapLinear);
  }
};

struct UserAccum {
  ScalarFitAccum fit;
  double sum_g = 0.0, sum_g2 = 0.0;
  double sum_ph = 0.0, sum_ph2 = 0.0;
  std::uint64_t n_stat = 0;
  std::uint64_t bits = 0, bit_errors = 0;
  int consec_errors = 0;
  bool lock_lost = false;

  UserMetrics finalize(int bits_per_symbol) const {
    UserMetrics um;
    const double lin = fit.sinr_linear();
    um.sinr_db = linear_to_db(std::max(lin, 1e-12));
    um.evm = lin > 0.0 ? 1.0 / std::sqrt(lin) : 1.0;
    um.bits = bits;
    um.bit_errors = bit_errors;
    um.ber = bits > 0 ? static_cast<double>(bit_errors) / static_cast<double>(bits) : 0.0;
    if (n_stat > 0) {
      const double inv = 1.0 / static_cast<double>(n_stat);
      um.static_gain = sum_g * inv;
      um.gain_var = std::max(0.0, sum_g2 * inv - um.static_gain * um.static_gain);
      const double mean_ph = sum_ph * inv;
      um.resid_phase_var = std::max(0.0, sum_ph2 * inv - mean_ph * mean_ph);
    }
    (void)bits_per_symbol;
    return um;
  }
};

}  // namespace

std::vector<std::string> SimConfig::validate() const {
  arch.validate();
  cr.validate(symbol_rate_hz);
  if (k_users < 1) throw std::invalid_argument("SimConfig: k_users must be >= 1");
  if (k_users > arch.m_elements)
    throw std::invalid_argument("SimConfig: k_users must be <= m_elements");
  if (n_symbols == 0) throw std::invalid_argument("SimConfig: n_symbols must be > 0");
  if (n_trials < 1) throw std::invalid_argument("SimConfig: n_trials must be >= 1");
  if (!(epoch_s * symbol_rate_hz >= 1.0))
    throw std::invalid_argument("SimConfig: epoch must span at least one symbol");
  if (jobs < 1) throw std::invalid_argument("SimConfig: jobs must be >= 1");
  std::vector<std::string> warnings;
  const double want = 10.0 * symbol_rate_hz / cr.bandwidth_hz;
  if (static_cast<double>(n_symbols) < want)
    warnings.push_back("n_symbols below 10x symbol_rate/cr_bandwidth; carrier-recovery loop "
                       "statistics will be under-resolved");
  return warnings;
}

SimMetrics run_uplink_trial(const SimConfig& cfg, int trial_index) {
  cfg.validate();
  const double fs = cfg.symbol_rate_hz;
  const int m = cfg.arch.m_elements;
  const int k = cfg.k_users;
  const std::size_t total = cfg.n_symbols;
  const Constellation cons = Constellation::make(cfg.constellation);
  const int bps = cons.bits_per_symbol();
  const auto csize = static_cast<std::uint32_t>(cons.size());

  const std::uint64_t trial_seed = derive_seed(cfg.seed, 0x5EED0000ULL + trial_index);

  const ChannelMatrix channel =
      los_channel(m, separated_angles(k, cfg.user_separation_deg), cfg.element_spacing_wl);
  const BeamformerKind bf_kind = cfg.effective_beamformer();

  const std::size_t epoch_symbols =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.epoch_s * fs)));
  // Settling window after each channel estimate: five CR time constants,
  // capped at half the epoch (and half the run) so slow loops still yield
  // statistics.
  const std::size_t transient =
      std::min({static_cast<std::size_t>(std::ceil(5.0 * fs / cfg.cr.bandwidth_hz)),
                epoch_symbols / 2, total / 2});

  double noise_power = 0.0;
  if (cfg.thermal_snr_db) noise_power = db_to_linear(-*cfg.thermal_snr_db);

  std::unique_ptr<LoNoiseStreamer> streamer;
  if (cfg.phase_noise)
    streamer = std::make_unique<LoNoiseStreamer>(cfg.arch, fs, derive_seed(trial_seed, 0));
  GaussianSampler noise_rng(derive_seed(trial_seed, 1));
  std::vector<std::mt19937_64> bit_rngs;
  bit_rngs.reserve(k);
  for (int u = 0; u < k; ++u) bit_rngs.emplace_back(derive_seed(trial_seed, 2 + u));

  std::vector<CarrierRecovery> crs;
  crs.reserve(k);
  for (int u = 0; u < k; ++u) crs.emplace_back(cfg.cr, fs, cons);
  std::vector<UserAccum> acc(k);

  Eigen::MatrixXcd w;  // refreshed at each epoch
  Eigen::MatrixXcd x(k, kBlockSymbols);
  Eigen::MatrixXcd y;
  std::vector<std::uint32_t> tx_idx(static_cast<std::size_t>(k) * kBlockSymbols);

  const int groups = cfg.phase_noise ? streamer->n_groups() : 1;
  const int per_group = cfg.arch.n_per_pll;

  std::size_t t = 0;
  while (t < total) {
    const std::size_t epoch_pos = t % epoch_symbols;
    const std::size_t to_epoch_end = epoch_symbols - epoch_pos;
    const std::size_t block = std::min({kBlockSymbols, total - t, to_epoch_end});

    if (cfg.phase_noise) streamer->next(block);

    if (epoch_pos == 0) {
      // Channel estimation instant: ideal estimate with the phases frozen at
      // the first sample of the epoch.
      std::vector<double> phases(m, 0.0);
      if (cfg.phase_noise) {
        for (int e = 0; e < m; ++e)
          phases[e] = streamer->ref_block()[0] + streamer->group_block(e / per_group)[0];
      }
      const Eigen::MatrixXcd h_hat = estimate_channel(channel.h, phases);
      w = (bf_kind == BeamformerKind::zero_forcing) ? beamform_zf(h_hat).w
                                                    : beamform_conj(h_hat).w;
      for (auto& cr : crs) cr.reset_phase_tracking();
    }

    // Transmit symbols.
    for (int u = 0; u < k; ++u) {
      for (std::size_t i = 0; i < block; ++i) {
        const auto idx = static_cast<std::uint32_t>(bit_rngs[u]() & (csize - 1));
        tx_idx[u * kBlockSymbols + i] = idx;
        x(u, i) = cons.point(idx);
      }
    }

    // Through the channel, the per-element LO phases, and the beamformer.
    y.noalias() = channel.h * x.leftCols(block);
    if (noise_power > 0.0) {
      const double s = std::sqrt(noise_power / 2.0);
      for (std::size_t i = 0; i < block; ++i)
        for (int e = 0; e < m; ++e)
          y(e, i) += std::complex<double>(s * noise_rng(), s * noise_rng());
    }
    if (cfg.phase_noise) {
      for (int g = 0; g < groups; ++g) {
        const auto& ref = streamer->ref_block();
        const auto& vco = streamer->group_block(g);
        for (std::size_t i = 0; i < block; ++i) {
          const std::complex<double> rot = std::polar(1.0, ref[i] + vco[i]);
          y.col(i).segment(g * per_group, per_group) *= rot;
        }
      }
    }
    const Eigen::MatrixXcd x_hat = w * y;

    // Per-user carrier recovery and metric accumulation.
    for (int u = 0; u < k; ++u) {
      auto& cr = crs[u];
      auto& a = acc[u];
      for (std::size_t i = 0; i < block; ++i) {
        const double gain_before = cr.gain();
        const CarrierRecovery::Step st = cr.step(x_hat(u, i));
        const std::uint32_t txw = tx_idx[u * kBlockSymbols + i];

        if (st.decision != txw) {
          if (++a.consec_errors >= kLockBurstLength) a.lock_lost = true;
        } else {
          a.consec_errors = 0;
        }

        if (epoch_pos + i < transient) continue;
        const std::complex<double> ref_sym = cons.point(txw);
        a.fit.add(st.corrected, ref_sym);
        a.bits += bps;
        a.bit_errors += bit_errors(st.decision, txw);
        // Pre-AGC instantaneous gain and post-CR residual phase vs truth.
        const std::complex<double> zx = st.corrected * std::conj(ref_sym);
        const double g_inst = zx.real() / std::norm(ref_sym) * gain_before;
        a.sum_g += g_inst;
        a.sum_g2 += g_inst * g_inst;
        const double ph = std::arg(zx);
        a.sum_ph += ph;
        a.sum_ph2 += ph * ph;
        ++a.n_stat;
      }
    }
    t += block;
  }

  SimMetrics out;
  out.per_user.resize(k);
  double pool_sig = 0.0, pool_err = 0.0;
  for (int u = 0; u < k; ++u) {
    out.per_user[u] = acc[u].finalize(bps);
    const double lin = acc[u].fit.sinr_linear();
    // Pool linear signal and error power across users (unit signal power).
    pool_sig += 1.0;
    pool_err += lin > 0.0 ? 1.0 / lin : 1e12;
    out.bits += out.per_user[u].bits;
    out.bit_errors += out.per_user[u].bit_errors;
    out.lock_lost = out.lock_lost || acc[u].lock_lost;
    out.static_gain += (out.per_user[u].static_gain - out.static_gain) / (u + 1);
    out.gain_var += (out.per_user[u].gain_var - out.gain_var) / (u + 1);
    out.resid_phase_var += (out.per_user[u].resid_phase_var - out.resid_phase_var) / (u + 1);
  }
  const double pooled = std::min(pool_sig / std::max(pool_err, 1e-300), kSinrCapLinear);
  out.sinr_db = linear_to_db(std::max(pooled, 1e-12));
  out.evm = pooled > 0.0 ? 1.0 / std::sqrt(pooled) : 1.0;
  out.ber = out.bits > 0 ? static_cast<double>(out.bit_errors) / static_cast<double>(out.bits) : 0.0;
  return out;
}

SimMetrics run_uplink(const SimConfig& cfg) {
  cfg.validate();
  const int trials = cfg.n_trials;
  std::vector<SimMetrics> results(trials);
  const int jobs = std::max(1, std::min(cfg.jobs, trials));
  if (jobs == 1) {
    for (int i = 0; i < trials; ++i) results[i] = run_uplink_trial(cfg, i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1))
          results[i] = run_uplink_trial(cfg, i);
      });
    }
    for (auto& th : pool) th.join();
  }

  SimMetrics agg;
  agg.n_trials = trials;
  agg.per_user.resize(cfg.k_users);
  double sum_sinr = 0.0, sum_sinr2 = 0.0;
  for (const SimMetrics& r : results) {
    sum_sinr += r.sinr_db;
    sum_sinr2 += r.sinr_db * r.sinr_db;
    agg.bits += r.bits;
    agg.bit_errors += r.bit_errors;
    agg.lock_lost = agg.lock_lost || r.lock_lost;
    agg.static_gain += r.static_gain / trials;
    agg.gain_var += r.gain_var / trials;
    agg.resid_phase_var += r.resid_phase_var / trials;
    for (int u = 0; u < cfg.k_users; ++u) {
      agg.per_user[u].sinr_db += r.per_user[u].sinr_db / trials;
      agg.per_user[u].evm += r.per_user[u].evm / trials;
      agg.per_user[u].static_gain += r.per_user[u].static_gain / trials;
      agg.per_user[u].gain_var += r.per_user[u].gain_var / trials;
      agg.per_user[u].resid_phase_var += r.per_user[u].resid_phase_var / trials;
      agg.per_user[u].bits += r.per_user[u].bits;
      agg.per_user[u].bit_errors += r.per_user[u].bit_errors;
    }
  }
  for (int u = 0; u < cfg.k_users; ++u) {
    auto& pu = agg.per_user[u];
    pu.ber = pu.bits > 0 ? static_cast<double>(pu.bit_errors) / static_cast<double>(pu.bits) : 0.0;
  }
  agg.sinr_db = sum_sinr / trials;
  agg.evm = std::pow(10.0, -agg.sinr_db / 20.0);
  const double var = std::max(0.0, sum_sinr2 / trials - agg.sinr_db * agg.sinr_db);
  agg.sinr_std_db = std::sqrt(var);
  agg.sinr_ci95_db = trials > 1 ? 1.96 * agg.sinr_std_db / std::sqrt(trials - 1.0) : 0.0;
  agg.ber = agg.bits > 0 ? static_cast<double>(agg.bit_errors) / static_cast<double>(agg.bits) : 0.0;
  return agg;
}

double measure_sinr(std::span<const std::complex<double>> rx,
                    std::span<const std::complex<double>> tx) {
  if (rx.size() != tx.size() || rx.empty())
    throw std::invalid_argument("measure_sinr: sequences must be equal-length and non-empty");
  ScalarFitAccum fit;
  for (std::size_t i = 0; i < rx.size(); ++i) fit.add(rx[i], tx[i]);
  return linear_to_db(std::max(fit.sinr_linear(), 1e-12));
}

double measure_ber(std::span<const std::uint32_t> rx_symbols,
                   std::span<const std::uint32_t> tx_symbols, int bits_per_symbol) {
  if (rx_symbols.size() != tx_symbols.size() || rx_symbols.empty())
    throw std::invalid_argument("measure_ber: sequences must be equal-length and non-empty");
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < rx_symbols.size(); ++i)
    errors += bit_errors(rx_symbols[i], tx_symbols[i]);
  return static_cast<double>(errors) /
         (static_cast<double>(rx_symbols.size()) * bits_per_symbol);
}

namespace {

std::vector<SweepPoint> sweep_impl(const SimConfig& base, const std::vector<double>& xs,
                                   void (*mutate)(SimConfig&, double)) {
  std::vector<SweepPoint> out;
  out.reserve(xs.size());
  for (double v : xs) {
    SimConfig cfg = base;
    mutate(cfg, v);
    SweepPoint pt;
    pt.x = v;
    pt.metrics = run_uplink(cfg);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace

std::vector<SweepPoint> sweep_pll_bandwidth(const SimConfig& config,
                                            const std::vector<double>& bandwidths_hz) {
  return sweep_impl(config, bandwidths_hz,
                    [](SimConfig& c, double bw) { c.arch.mmw_pll.loop_bandwidth_hz = bw; });
}

std::vector<SweepPoint> sweep_users(const SimConfig& config, const std::vector<int>& k_list) {
  std::vector<double> xs(k_list.begin(), k_list.end());
  return sweep_impl(config, xs,
                    [](SimConfig& c, double k) { c.k_users = static_cast<int>(k); });
}

std::vector<SweepPoint> sweep_subarray(const SimConfig& config, const std::vector<int>& n_list) {
  std::vector<double> xs(n_list.begin(), n_list.end());
  return sweep_impl(config, xs,
                    [](SimConfig& c, double n) { c.arch.n_per_pll = static_cast<int>(n); });
}

SinrModelFit fit_sinr_model(const std::vector<SweepPoint>& users_curve, double gamma,
                            double thermal_power_linear) {
  SinrModelFit fit;
  fit.n_t = thermal_power_linear;
  const SweepPoint* k1 = nullptr;
  for (const auto& p : users_curve)
    if (p.x == 1.0) k1 = &p;
  if (!k1) return fit;  // need the K=1 anchor for N_p
  fit.n_p = db_to_linear(-k1->metrics.sinr_db) - thermal_power_linear;
  if (!(fit.n_p > 0.0) || gamma <= 0.0) return fit;  // degenerate (e.g. fully correlated)

  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : users_curve) {
    if (p.x <= 1.0) continue;
    const double inv_sinr = db_to_linear(-p.metrics.sinr_db);
    const double yv = inv_sinr - thermal_power_linear - fit.n_p;
    const double xv = gamma * (p.x - 1.0) * fit.n_p;
    sxx += xv * xv;
    sxy += xv * yv;
  }
  if (!(sxx > 0.0)) return fit;
  fit.alpha = sxy / sxx;
  fit.valid = true;

  fit.model_sinr_db.reserve(users_curve.size());
  for (const auto& p : users_curve) {
    const double denom =
        thermal_power_linear + fit.n_p + fit.alpha * gamma * (p.x - 1.0) * fit.n_p;
    const double model_db = linear_to_db(1.0 / denom);
    fit.model_sinr_db.push_back(model_db);
    fit.max_residual_db = std::max(fit.max_residual_db, std::abs(model_db - p.metrics.sinr_db));
  }
  return fit;
}

double CrBandwidthPolicy::bandwidth_for(double snr_db) const {
  if (entries.empty()) throw std::logic_error("CrBandwidthPolicy: empty table");
  const Entry* best = nullptr;
  const Entry* smallest = &entries.front();
  for (const Entry& e : entries) {
    if (e.bandwidth_hz < smallest->bandwidth_hz) smallest = &e;
    if (snr_db >= e.min_snr_db && (!best || e.min_snr_db > best->min_snr_db)) best = &e;
  }
  return best ? best->bandwidth_hz : smallest->bandwidth_hz;
}

CrBandwidthPolicy CrBandwidthPolicy::default_policy() {
  // Reduced bandwidth at low SNR where decision errors would destabilize the
  // decision-directed loop; wide open once the constellation is clean.
  CrBandwidthPolicy p;
  p.entries = {{-100.0, 0.3e6}, {12.0, 1e6}, {18.0, 3e6}, {24.0, 10e6}};
  return p;
}

std::vector<BerCurvePoint> ber_curve(const SimConfig& config, const std::vector<double>& snr_list,
                                     const std::vector<ConstellationKind>& constellations,
                                     const CrBandwidthPolicy& policy) {
  std::vector<BerCurvePoint> out;
  for (ConstellationKind kind : constellations) {
    for (double snr : snr_list) {
      SimConfig cfg = config;
      cfg.constellation = kind;
      cfg.thermal_snr_db = snr;
      cfg.cr.bandwidth_hz = policy.bandwidth_for(snr);
      BerCurvePoint pt;
      pt.constellation = kind;
      pt.snr_db = snr;
      pt.cr_bandwidth_hz = cfg.cr.bandwidth_hz;
      cfg.phase_noise = true;
      SimMetrics with_pn = run_uplink(cfg);
      pt.ber_with_pn = with_pn.ber;
      pt.sinr_with_pn_db = with_pn.sinr_db;
      pt.lock_lost = with_pn.lock_lost;
      cfg.phase_noise = false;
      SimMetrics without_pn = run_uplink(cfg);
      pt.ber_without_pn = without_pn.ber;
      pt.sinr_without_pn_db = without_pn.sinr_db;
      pt.lock_lost = pt.lock_lost || without_pn.lock_lost;
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace lochain
