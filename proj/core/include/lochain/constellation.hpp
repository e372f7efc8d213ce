// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_CONSTELLATION_HPP
#define LOCHAIN_CONSTELLATION_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace lochain {

enum class ConstellationKind { qpsk, qam16, qam64, qam256 };

ConstellationKind constellation_from_name(const std::string& name);
std::string constellation_name(ConstellationKind kind);

/// Square Gray-mapped QAM with unit average symbol energy. A symbol index
/// packs the bit word directly: the high half of the bits selects the I level
/// and the low half the Q level, each through a Gray code so that neighboring
/// levels differ in exactly one bit.
class Constellation {
 public:
  static Constellation make(ConstellationKind kind);

  int bits_per_symbol() const { return bits_; }
  int size() const { return 1 << bits_; }

  std::complex<double> point(std::uint32_t index) const;
  std::uint32_t nearest(std::complex<double> z) const;

  /// Minimum distance between constellation points.
  double min_distance() const { return 2.0 * scale_; }

 private:
  Constellation(int bits, int levels);
  int axis_index(double v) const;

  int bits_;
  int levels_;       // per axis
  double scale_;     // half the level spacing
  std::vector<double> amplitudes_;      // level index -> amplitude
  std::vector<std::uint32_t> gray_;     // level index -> gray code
  std::vector<std::uint32_t> degray_;   // gray code -> level index
};

/// Hamming distance between two bit words.
int bit_errors(std::uint32_t a, std::uint32_t b);

}  // namespace lochain

#endif
