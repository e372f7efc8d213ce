// SPDX-License-Identifier: Apache-2.0

#include "lochain/phase_noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "lochain/units.hpp"

namespace lochain {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double white_sample_variance(double floor_dbchz, double sample_rate_hz) {
  // One-sided phase PSD 2*linear(floor) integrated up to Nyquist.
  return 2.0 * db_to_linear(floor_dbchz) * (sample_rate_hz / 2.0);
}

double wiener_increment_variance(const PhaseNoisePsd::Anchor& a, double sample_rate_hz) {
  // A Wiener process with increment variance c*dt has one-sided phase PSD
  // c / (2*pi^2*f^2); matching L(f_a) = S_phi/2 gives c = 4*pi^2*f_a^2*l_a.
  const double c = 4.0 * std::numbers::pi * std::numbers::pi * a.offset_hz * a.offset_hz *
                   db_to_linear(a.level_dbchz);
  return c / sample_rate_hz;
}

}  // namespace

PhaseNoisePsd PhaseNoisePsd::shifted(double db) const {
  PhaseNoisePsd out = *this;
  if (out.white_floor_dbchz) *out.white_floor_dbchz += db;
  if (out.f2_anchor) out.f2_anchor->level_dbchz += db;
  return out;
}

double psd_eval(const PhaseNoisePsd& psd, double f_offset_hz) {
  if (!(f_offset_hz > 0.0)) throw std::domain_error("psd_eval: offset must be > 0");
  double lin = 0.0;
  if (psd.white_floor_dbchz) lin += db_to_linear(*psd.white_floor_dbchz);
  if (psd.f2_anchor) {
    const double ratio = psd.f2_anchor->offset_hz / f_offset_hz;
    lin += db_to_linear(psd.f2_anchor->level_dbchz) * ratio * ratio;
  }
  return lin > 0.0 ? linear_to_db(lin) : kNegInf;
}

PhaseNoisePsd refer_to_output(const PhaseNoisePsd& psd, double f_in_hz, double f_out_hz) {
  if (!(f_in_hz > 0.0) || !(f_out_hz > 0.0))
    throw std::domain_error("refer_to_output: frequencies must be > 0");
  return psd.shifted(20.0 * std::log10(f_out_hz / f_in_hz));
}

PhaseTrace gen_wiener_trace(const PhaseNoisePsd& psd, double sample_rate_hz, std::size_t n,
                            std::uint64_t seed) {
  if (!psd.f2_anchor) throw std::invalid_argument("gen_wiener_trace: PSD has no 1/f^2 segment");
  if (n == 0 || !(sample_rate_hz > 0.0))
    throw std::invalid_argument("gen_wiener_trace: need n > 0 and positive sample rate");
  PhaseTrace out;
  out.sample_rate_hz = sample_rate_hz;
  out.phase_rad.resize(n);
  const double sigma = std::sqrt(wiener_increment_variance(*psd.f2_anchor, sample_rate_hz));
  GaussianSampler rng(seed);
  double walk = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    walk += sigma * rng();
    out.phase_rad[i] = walk;
  }
  return out;
}

PhaseTrace gen_white_trace(const PhaseNoisePsd& psd, double sample_rate_hz, std::size_t n,
                           std::uint64_t seed) {
  if (!psd.white_floor_dbchz) throw std::invalid_argument("gen_white_trace: PSD has no white floor");
  if (n == 0 || !(sample_rate_hz > 0.0))
    throw std::invalid_argument("gen_white_trace: need n > 0 and positive sample rate");
  PhaseTrace out;
  out.sample_rate_hz = sample_rate_hz;
  out.phase_rad.resize(n);
  const double sigma = std::sqrt(white_sample_variance(*psd.white_floor_dbchz, sample_rate_hz));
  GaussianSampler rng(seed);
  for (std::size_t i = 0; i < n; ++i) out.phase_rad[i] = sigma * rng();
  return out;
}

PhaseTrace synth_trace(const PhaseNoisePsd& psd, double sample_rate_hz, std::size_t n,
                       std::uint64_t seed) {
  PhaseTrace out;
  out.sample_rate_hz = sample_rate_hz;
  out.phase_rad.assign(n, 0.0);
  NoiseStream stream(psd, sample_rate_hz, seed);
  stream.next(out.phase_rad);
  return out;
}

ContinuousSos PllParams::ref_transfer() const {
  const double wn = 2.0 * std::numbers::pi * natural_frequency_hz();
  const double r = multiplication_ratio();
  return ContinuousSos{0.0, r * 2.0 * damping * wn, r * wn * wn, 1.0, 2.0 * damping * wn, wn * wn};
}

ContinuousSos PllParams::vco_transfer() const {
  const double wn = 2.0 * std::numbers::pi * natural_frequency_hz();
  return ContinuousSos{1.0, 0.0, 0.0, 1.0, 2.0 * damping * wn, wn * wn};
}

void PllParams::validate() const {
  if (!(f_ref_hz > 0.0) || !(f_out_hz > 0.0))
    throw std::invalid_argument("PllParams: frequencies must be > 0");
  if (f_out_hz < f_ref_hz) throw std::invalid_argument("PllParams: f_out must be >= f_ref");
  if (!(loop_bandwidth_hz > 0.0)) throw std::invalid_argument("PllParams: loop bandwidth must be > 0");
  if (!(loop_bandwidth_hz < f_ref_hz / 10.0))
    throw std::invalid_argument("PllParams: loop bandwidth must be < f_ref/10");
  if (!(damping > 0.0)) throw std::invalid_argument("PllParams: damping must be > 0");
}

PllGains pll_transfer(const PllParams& params, double f_hz) {
  if (!(f_hz > 0.0)) throw std::domain_error("pll_transfer: frequency must be > 0");
  return PllGains{std::abs(params.ref_transfer().response(f_hz)),
                  std::abs(params.vco_transfer().response(f_hz))};
}

PhaseTrace pll_filter_traces(const PllParams& params, const PhaseTrace& ref_trace,
                             const PhaseTrace& vco_trace) {
  if (ref_trace.sample_rate_hz != vco_trace.sample_rate_hz)
    throw std::invalid_argument("pll_filter_traces: sample rates differ");
  if (ref_trace.size() != vco_trace.size())
    throw std::invalid_argument("pll_filter_traces: lengths differ");
  const double fs = ref_trace.sample_rate_hz;
  Biquad ref_f = Biquad::bilinear(params.ref_transfer(), fs);
  Biquad vco_f = Biquad::bilinear(params.vco_transfer(), fs);
  PhaseTrace out;
  out.sample_rate_hz = fs;
  out.phase_rad.resize(ref_trace.size());
  for (std::size_t i = 0; i < ref_trace.size(); ++i)
    out.phase_rad[i] = ref_f.step(ref_trace.phase_rad[i]) + vco_f.step(vco_trace.phase_rad[i]);
  return out;
}

PhaseTrace cascade_if_pll(const PllParams& if_params, double dist_floor_dbchz,
                          const PllParams& mmw_params, double sample_rate_hz, std::size_t n,
                          std::uint64_t seed) {
  if (if_params.f_out_hz != mmw_params.f_ref_hz)
    throw std::invalid_argument("cascade_if_pll: IF output must equal mm-wave reference frequency");
  PhaseTrace ref = synth_trace(if_params.ref_psd, sample_rate_hz, n, derive_seed(seed, 0));
  PhaseTrace vco = synth_trace(if_params.vco_psd, sample_rate_hz, n, derive_seed(seed, 1));
  PhaseTrace out = pll_filter_traces(if_params, ref, vco);
  const PhaseNoisePsd buffers = PhaseNoisePsd::white(dist_floor_dbchz);
  NoiseStream buf(buffers, sample_rate_hz, derive_seed(seed, 2));
  std::vector<double> noise(n, 0.0);
  buf.next(noise);
  for (std::size_t i = 0; i < n; ++i) out.phase_rad[i] += noise[i];
  return out;
}

NoiseStream::NoiseStream(const PhaseNoisePsd& psd, double sample_rate_hz, std::uint64_t seed)
    : white_rng_(derive_seed(seed, 0)), wiener_rng_(derive_seed(seed, 1)) {
  if (psd.white_floor_dbchz) {
    const double v = white_sample_variance(*psd.white_floor_dbchz, sample_rate_hz);
    white_sigma_ = std::sqrt(v);
  }
  if (psd.f2_anchor) {
    const double v = wiener_increment_variance(*psd.f2_anchor, sample_rate_hz);
    wiener_sigma_ = std::sqrt(v);
  }
}

void NoiseStream::next(std::span<double> out) {
  for (double& y : out) {
    double v = 0.0;
    if (wiener_sigma_ > 0.0) {
      walk_ += wiener_sigma_ * wiener_rng_();
      v += walk_;
    }
    if (white_sigma_ > 0.0) v += white_sigma_ * white_rng_();
    y = v;
  }
}

}  // namespace lochain
