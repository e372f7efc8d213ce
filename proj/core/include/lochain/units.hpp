// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_UNITS_HPP
#define LOCHAIN_UNITS_HPP

#include <cmath>

namespace lochain {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }

/// Gain of an antenna array of `elements` isotropic elements, in dB.
inline double array_gain_db(int elements) { return 10.0 * std::log10(static_cast<double>(elements)); }

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

}  // namespace lochain

#endif
