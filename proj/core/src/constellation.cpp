// SPDX-License-Identifier: Apache-2.0

#include "lochain/constellation.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace lochain {

ConstellationKind constellation_from_name(const std::string& name) {
  if (name == "qpsk" || name == "4qam") return ConstellationKind::qpsk;
  if (name == "16qam") return ConstellationKind::qam16;
  if (name == "64qam") return ConstellationKind::qam64;
  if (name == "256qam") return ConstellationKind::qam256;
  throw std::invalid_argument("unknown constellation: " + name +
                              " (expected qpsk|16qam|64qam|256qam)");
}

std::string constellation_name(ConstellationKind kind) {
  switch (kind) {
    case ConstellationKind::qpsk: return "qpsk";
    case ConstellationKind::qam16: return "16qam";
    case ConstellationKind::qam64: return "64qam";
    case ConstellationKind::qam256: return "256qam";
  }
  return "?";
}

Constellation Constellation::make(ConstellationKind kind) {
  switch (kind) {
    case ConstellationKind::qpsk: return Constellation(2, 2);
    case ConstellationKind::qam16: return Constellation(4, 4);
    case ConstellationKind::qam64: return Constellation(6, 8);
    case ConstellationKind::qam256: return Constellation(8, 16);
  }
  throw std::invalid_argument("unknown constellation kind");
}

Constellation::Constellation(int bits, int levels) : bits_(bits), levels_(levels) {
  // Unit average energy: E = 2 * d^2 * (L^2 - 1) / 3 over the two axes.
  scale_ = std::sqrt(3.0 / (2.0 * (levels * levels - 1)));
  amplitudes_.resize(levels);
  gray_.resize(levels);
  degray_.resize(levels);
  for (int i = 0; i < levels; ++i) {
    amplitudes_[i] = scale_ * (2 * i - (levels - 1));
    const auto g = static_cast<std::uint32_t>(i ^ (i >> 1));
    gray_[i] = g;
    degray_[g] = static_cast<std::uint32_t>(i);
  }
}

std::complex<double> Constellation::point(std::uint32_t index) const {
  const int half = bits_ / 2;
  const std::uint32_t gi = index >> half;
  const std::uint32_t gq = index & ((1u << half) - 1u);
  return {amplitudes_[degray_[gi]], amplitudes_[degray_[gq]]};
}

int Constellation::axis_index(double v) const {
  int i = static_cast<int>(std::floor(v / (2.0 * scale_) + 0.5 * levels_));
  if (i < 0) i = 0;
  if (i >= levels_) i = levels_ - 1;
  return i;
}

std::uint32_t Constellation::nearest(std::complex<double> z) const {
  const int half = bits_ / 2;
  const std::uint32_t gi = gray_[axis_index(z.real())];
  const std::uint32_t gq = gray_[axis_index(z.imag())];
  return (gi << half) | gq;
}

int bit_errors(std::uint32_t a, std::uint32_t b) { return std::popcount(a ^ b); }

}  // namespace lochain
