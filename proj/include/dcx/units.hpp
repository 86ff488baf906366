#pragma once

#include <cmath>
#include <limits>

namespace dcx::units {

inline constexpr double kPlanck = 6.62607015e-34;         // J*s
inline constexpr double kSpeedOfLight = 299792458.0;      // m/s
inline constexpr double kSpeedOfLightKmPerS = 299792.458;
inline constexpr double kOsnrReferenceGhz = 12.5;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// dB/km to 1/km (power attenuation coefficient).
inline double alpha_per_km(double db_per_km) { return db_per_km / (10.0 * std::log10(std::exp(1.0))); }

}  // namespace dcx::units
