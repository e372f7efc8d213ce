// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <complex>
#include <numbers>
#include <vector>

#include "lochain/channel_link.hpp"
#include "lochain/rng.hpp"
#include "lochain/rx_dsp.hpp"
#include "lochain/units.hpp"

using namespace lochain;

namespace {

std::vector<double> zeros(int m) { return std::vector<double>(m, 0.0); }

}  // namespace

TEST_CASE("ideal estimation with zero phase returns the channel itself") {
  const ChannelMatrix c = los_channel(8, {0.0, 12.0});
  const Eigen::MatrixXcd h_hat = estimate_channel(c.h, zeros(8));
  CHECK((h_hat - c.h).norm() == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("a common phase factors out of the estimate") {
  const ChannelMatrix c = los_channel(8, {0.0, 12.0});
  const double psi = 0.7;
  const Eigen::MatrixXcd h_hat = estimate_channel(c.h, std::vector<double>(8, psi));
  const Eigen::MatrixXcd expected = std::polar(1.0, psi) * c.h;
  CHECK((h_hat - expected).norm() < 1e-12);
}

TEST_CASE("zero-forcing inverts the estimate") {
  const ChannelMatrix c = los_channel(32, {-15.0, 0.0, 22.0});
  const Beamformer zf = beamform_zf(c.h);
  const Eigen::MatrixXcd prod = zf.w * c.h;
  CHECK((prod - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-10);
}

TEST_CASE("single-user zero forcing equals the normalized conjugate beamformer") {
  const ChannelMatrix c = los_channel(16, {17.0});
  const Beamformer zf = beamform_zf(c.h);
  const Beamformer mrc = beamform_conj(c.h);
  CHECK((zf.w - mrc.w).norm() < 1e-12);
}

TEST_CASE("orthogonal columns make zero forcing collapse to the conjugate") {
  // Angles chosen on the DFT grid of an 8-element half-wavelength array.
  const int m = 8;
  std::vector<double> angles;
  for (int k : {0, 1, 2})
    angles.push_back(std::asin(2.0 * k / m) * 180.0 / std::numbers::pi);
  const ChannelMatrix c = los_channel(m, angles);
  const Beamformer zf = beamform_zf(c.h);
  const Beamformer mrc = beamform_conj(c.h);
  CHECK((zf.w - mrc.w).norm() < 1e-10);
}

TEST_CASE("ill-conditioned estimates are rejected") {
  const ChannelMatrix c = los_channel(8, {10.0, 10.0});
  CHECK_THROWS_AS(beamform_zf(c.h), std::runtime_error);
}

TEST_CASE("apply_phase_noise_rx with no impairments is exact") {
  const ChannelMatrix c = los_channel(16, {-5.0, 5.0});
  const Beamformer zf = beamform_zf(c.h);
  Eigen::VectorXcd x(2);
  x << std::complex<double>(1.0, 1.0), std::complex<double>(-1.0, 1.0);
  const Eigen::VectorXcd noise = Eigen::VectorXcd::Zero(16);
  const Eigen::VectorXcd out = apply_phase_noise_rx(zf, c.h, x, zeros(16), noise);
  CHECK((out - x).norm() < 1e-12);
}

TEST_CASE("common phase rotates the output without touching magnitudes") {
  const ChannelMatrix c = los_channel(16, {-8.0, 8.0});
  const Beamformer zf = beamform_zf(c.h);
  Eigen::VectorXcd x(2);
  x << std::complex<double>(0.6, -0.2), std::complex<double>(-0.3, 0.9);
  const Eigen::VectorXcd noise = Eigen::VectorXcd::Zero(16);
  const double psi = 1.1;
  const Eigen::VectorXcd out =
      apply_phase_noise_rx(zf, c.h, x, std::vector<double>(16, psi), noise);
  for (int u = 0; u < 2; ++u) {
    CHECK(std::abs(out(u) - std::polar(1.0, psi) * x(u)) < 1e-12);
    CHECK(std::abs(out(u)) == doctest::Approx(std::abs(x(u))).epsilon(1e-12));
  }
}

TEST_CASE("common phase invariance holds on top of arbitrary per-element phases") {
  const ChannelMatrix c = los_channel(12, {-9.0, 14.0});
  const Beamformer zf = beamform_zf(c.h);
  GaussianSampler rng(5);
  std::vector<double> phases(12);
  for (double& p : phases) p = 0.2 * rng();
  Eigen::VectorXcd x(2);
  x << std::complex<double>(1.0, 0.0), std::complex<double>(0.0, 1.0);
  const Eigen::VectorXcd noise = Eigen::VectorXcd::Zero(12);
  const Eigen::VectorXcd base = apply_phase_noise_rx(zf, c.h, x, phases, noise);
  std::vector<double> shifted = phases;
  for (double& p : shifted) p += 0.9;
  const Eigen::VectorXcd rot = apply_phase_noise_rx(zf, c.h, x, shifted, noise);
  for (int u = 0; u < 2; ++u)
    CHECK(std::abs(rot(u)) == doctest::Approx(std::abs(base(u))).epsilon(1e-12));
}

TEST_CASE("uncorrelated phases leak between users per the brute-force effective channel") {
  const int m = 16;
  const ChannelMatrix c = los_channel(m, {-10.0, 10.0});
  const Beamformer zf = beamform_zf(c.h);
  GaussianSampler rng(6);
  std::vector<double> phases(m);
  for (double& p : phases) p = 0.15 * rng();

  Eigen::VectorXcd x(2);
  x << std::complex<double>(1.0, 0.0), std::complex<double>(0.0, 0.0);  // user 0 only
  const Eigen::VectorXcd noise = Eigen::VectorXcd::Zero(m);
  const Eigen::VectorXcd out = apply_phase_noise_rx(zf, c.h, x, phases, noise);

  // Oracle: A = H^H diag(e^{j phi}) H by explicit summation, then the ZF
  // G^-1 applied with a small hand-rolled 2x2 inverse.
  std::complex<double> a[2][2];
  for (int l = 0; l < 2; ++l)
    for (int k = 0; k < 2; ++k) {
      std::complex<double> s{0.0, 0.0};
      for (int e = 0; e < m; ++e)
        s += std::conj(c.h(e, l)) * std::polar(1.0, phases[e]) * c.h(e, k);
      a[l][k] = s;
    }
  std::complex<double> g[2][2];
  for (int l = 0; l < 2; ++l)
    for (int k = 0; k < 2; ++k) {
      std::complex<double> s{0.0, 0.0};
      for (int e = 0; e < m; ++e) s += std::conj(c.h(e, l)) * c.h(e, k);
      g[l][k] = s;
    }
  const std::complex<double> det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
  const std::complex<double> inv[2][2] = {{g[1][1] / det, -g[0][1] / det},
                                          {-g[1][0] / det, g[0][0] / det}};
  // x_hat = G^-1 A x with x = e_0.
  const std::complex<double> expect0 = inv[0][0] * a[0][0] + inv[0][1] * a[1][0];
  const std::complex<double> expect1 = inv[1][0] * a[0][0] + inv[1][1] * a[1][0];
  CHECK(std::abs(out(0) - expect0) < 1e-10);
  CHECK(std::abs(out(1) - expect1) < 1e-10);
  CHECK(std::abs(expect1) > 0.0);  // nonzero leakage
}

TEST_CASE("carrier recovery removes static phase and frequency offsets") {
  const Constellation cons = Constellation::make(ConstellationKind::qpsk);
  CarrierRecoveryParams params;
  params.bandwidth_hz = 10e6;
  const double fs = 2e9;

  GaussianSampler rng(7);
  SUBCASE("static phase") {
    CarrierRecovery cr(params, fs, cons);
    cr.set_agc(false);
    double last_err = 1.0;
    for (int t = 0; t < 20000; ++t) {
      const auto idx = static_cast<std::uint32_t>(rng.engine()() & 3u);
      const std::complex<double> sym = cons.point(idx) * std::polar(1.0, 0.3);
      last_err = std::abs(cr.step(sym).phase_error);
    }
    CHECK(last_err < 1e-3);
    CHECK(cr.phase() == doctest::Approx(0.3).epsilon(1e-3));
  }
  SUBCASE("static frequency") {
    CarrierRecovery cr(params, fs, cons);
    cr.set_agc(false);
    const double df = 1e-5;  // rad/symbol
    double acc = 0.0;
    double worst_tail = 0.0;
    for (int t = 0; t < 40000; ++t) {
      acc += df;
      const auto idx = static_cast<std::uint32_t>(rng.engine()() & 3u);
      const auto st = cr.step(cons.point(idx) * std::polar(1.0, acc));
      if (t > 30000) worst_tail = std::max(worst_tail, std::abs(st.phase_error));
    }
    CHECK(worst_tail < 1e-3);
  }
}

TEST_CASE("carrier recovery is a high-pass on input phase disturbances") {
  const Constellation cons = Constellation::make(ConstellationKind::qpsk);
  CarrierRecoveryParams params;
  params.bandwidth_hz = 10e6;
  const double fs = 2e9;
  GaussianSampler rng(8);

  auto residual_amplitude = [&](double f_dist) {
    CarrierRecovery cr(params, fs, cons);
    cr.set_agc(false);
    const double amp = 0.01;
    const int settle = 30000;
    const int cycles = std::max(4, static_cast<int>(f_dist / fs * 200000));
    const int n = static_cast<int>(cycles * fs / f_dist);
    double si = 0.0, sq = 0.0;
    int count = 0;
    for (int t = 0; t < settle + n; ++t) {
      const double w = 2.0 * std::numbers::pi * f_dist * t / fs;
      const double ph = amp * std::sin(w);
      const auto idx = static_cast<std::uint32_t>(rng.engine()() & 3u);
      const auto st = cr.step(cons.point(idx) * std::polar(1.0, ph));
      if (t >= settle) {
        const double resid =
            std::arg(st.corrected * std::conj(cons.point(st.decision)));
        si += resid * std::sin(w);
        sq += resid * std::cos(w);
        ++count;
      }
    }
    return 2.0 * std::hypot(si, sq) / count / amp;  // residual/input amplitude
  };

  CHECK(residual_amplitude(params.bandwidth_hz / 100.0) < 0.1);   // > 20 dB attenuation
  CHECK(residual_amplitude(params.bandwidth_hz * 20.0) > 0.89);   // < 1 dB attenuation
}

TEST_CASE("slow AGC block op") {
  std::vector<std::complex<double>> ref;
  GaussianSampler rng(9);
  const Constellation cons = Constellation::make(ConstellationKind::qam16);
  for (int i = 0; i < 5000; ++i)
    ref.push_back(cons.point(static_cast<std::uint32_t>(rng.engine()() & 15u)));

  SUBCASE("unit gain input is unchanged") {
    const auto out = slow_agc(ref, ref);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(out[i] - ref[i]) < 1e-12);
  }
  SUBCASE("constant attenuation is inverted exactly") {
    std::vector<std::complex<double>> rx = ref;
    for (auto& z : rx) z *= 0.37;
    CHECK(estimate_mean_gain(rx, ref) == doctest::Approx(0.37).epsilon(1e-12));
    const auto out = slow_agc(rx, ref);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(out[i] - ref[i]) < 1e-12);
  }
  SUBCASE("phase-noise run recovers unit mean gain within 1 percent") {
    std::vector<std::complex<double>> rx = ref;
    for (auto& z : rx) z *= std::polar(1.0, 0.1 * rng());
    const auto out = slow_agc(rx, ref);
    CHECK(estimate_mean_gain(out, ref) == doctest::Approx(1.0).epsilon(1e-12));
    // The pre-AGC mean gain is the phase-noise coherence loss, close to 1.
    CHECK(estimate_mean_gain(rx, ref) == doctest::Approx(std::exp(-0.005)).epsilon(0.01));
  }
}

TEST_CASE("in-loop AGC converges onto a constant gain error") {
  const Constellation cons = Constellation::make(ConstellationKind::qpsk);
  CarrierRecoveryParams params;
  params.bandwidth_hz = 10e6;
  CarrierRecovery cr(params, 2e9, cons);
  GaussianSampler rng(10);
  for (int t = 0; t < 30000; ++t) {
    const auto idx = static_cast<std::uint32_t>(rng.engine()() & 3u);
    cr.step(cons.point(idx) * 0.8);
  }
  CHECK(cr.gain() == doctest::Approx(0.8).epsilon(0.01));
}

TEST_CASE("static gain prediction follows the Gaussian characteristic function") {
  // Monte Carlo arbiter between exp(-sigma^2/2) and exp(-sigma^2).
  const double sigma = 0.2;
  const int m = 16;
  const int draws = 200000;
  GaussianSampler rng(11);
  std::complex<double> acc{0.0, 0.0};
  for (int d = 0; d < draws; ++d) {
    std::complex<double> s{0.0, 0.0};
    for (int e = 0; e < m; ++e) s += std::polar(1.0, sigma * rng());
    acc += s / static_cast<double>(m);
  }
  const double mc = std::abs(acc) / draws;
  const double predicted = coherent_gain_predict(sigma * sigma);
  CHECK(predicted == doctest::Approx(std::exp(-0.02)).epsilon(1e-12));
  CHECK(mc == doctest::Approx(predicted).epsilon(0.001));       // matches exp(-s^2/2)
  CHECK(std::abs(mc - std::exp(-0.04)) > 5.0 * 0.001 * mc);     // rejects exp(-s^2)
}

TEST_CASE("taylor residuals: mean-phase variance follows the averaging law") {
  const double sigma = 0.2;
  const int m = 16;
  const int draws = 100000;
  GaussianSampler rng(12);
  std::vector<std::vector<double>> phi(m, std::vector<double>(draws));
  for (int d = 0; d < draws; ++d)
    for (int e = 0; e < m; ++e) phi[e][d] = sigma * rng();
  const TaylorResiduals tr = taylor_residuals(phi);
  double s = 0.0, s2 = 0.0;
  for (double v : tr.theta) {
    s += v;
    s2 += v * v;
  }
  const double var = s2 / draws - (s / draws) * (s / draws);
  CHECK(var == doctest::Approx(sigma * sigma / m).epsilon(0.05));

  double gmean = 0.0;
  for (double v : tr.gain) gmean += v / draws;
  CHECK(gmean == doctest::Approx(1.0 - sigma * sigma / 2.0).epsilon(0.01));
}

TEST_CASE("self-interference ceiling matches the static-draw Monte Carlo within 1 dB") {
  const int m = 16;
  const int draws = 200000;
  for (double sigma : {0.1, 0.2, 0.3}) {
    GaussianSampler rng(13);
    double sum_re = 0.0, sum_re2 = 0.0;
    std::complex<double> mean{0.0, 0.0};
    for (int d = 0; d < draws; ++d) {
      std::complex<double> a{0.0, 0.0};
      for (int e = 0; e < m; ++e) a += std::polar(1.0, sigma * rng());
      a /= static_cast<double>(m);
      mean += a;
      sum_re += a.real();
      sum_re2 += a.real() * a.real();
    }
    mean /= static_cast<double>(draws);
    const double var_g_mc = sum_re2 / draws - (sum_re / draws) * (sum_re / draws);
    const double ceiling_mc = linear_to_db(std::norm(mean) / var_g_mc);

    const double static_gain = coherent_gain_predict(sigma * sigma);
    const double var_g_taylor = sigma * sigma * sigma * sigma / (2.0 * m);
    const double ceiling_model = linear_to_db(static_gain * static_gain / var_g_taylor);
    CHECK(std::abs(ceiling_model - ceiling_mc) < 1.0);
  }
}
