#pragma once

#include <vector>

#include "dcx/linetwin/twin.hpp"

namespace dcx::monitor {

using linetwin::PowerProfile;

/// Half-width (samples) of the two-sided windowed means used by the step detector.
inline constexpr int kStepWindow = 10;

struct LossEvent {
  double distance_km = 0.0;
  double magnitude_db = 0.0;
  double confidence = 0.0;
};

/// Persistent downward steps of (current - baseline) larger than min_step_db.
/// Throws GridMismatch when the profiles are not sampled on the same grid.
std::vector<LossEvent> localize_step_loss(const PowerProfile& baseline, const PowerProfile& current,
                                          double min_step_db);

/// Positions of persistent upward steps of at least min_jump_db.
std::vector<double> detect_amplifier_positions(const PowerProfile& profile, double min_jump_db);

struct FitSegment {
  double start_km = 0.0;
  double end_km = 0.0;
  double slope_db_per_km = 0.0;
  double intercept_db = 0.0;  // value at start_km
};

struct DenoisedProfile {
  PowerProfile profile;
  std::vector<FitSegment> segments;
  std::vector<double> change_points_km;
  double noise_sigma_db = 0.0;  // robust estimate from second differences
};

/// Piecewise-linear least-squares fit with step discontinuities. Change points
/// are inserted greedily while the residual reduction beats a noise-scaled
/// penalty. Requires at least 20 samples.
DenoisedProfile denoise_profile(const PowerProfile& profile);

}  // namespace dcx::monitor
