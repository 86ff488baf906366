#include "dcx/monitor/gain_tilt.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dcx/error.hpp"
#include "dcx/units.hpp"

namespace dcx::monitor {

using netmodel::EdfaUnit;

GsnrSpread final_edfa_spread(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm) {
  const auto g = qot::link_gsnr(link, grid, launch_dbm);
  if (g.accumulated.empty()) throw Error(Errc::InfeasibleRanges, link.id + " has no EDFA");
  const auto& last = g.accumulated.back().gsnr;
  GsnrSpread s;
  double lo = units::kInfinity, hi = -units::kInfinity, sum = 0.0;
  for (double v : last) {
    const double db = units::lin_to_db(v);
    lo = std::min(lo, db);
    hi = std::max(hi, db);
    sum += db;
  }
  s.flatness_db = hi - lo;
  s.mean_db = sum / static_cast<double>(last.size());
  return s;
}

OpticalLink apply_settings(const OpticalLink& link, const GainTiltSetting& setting) {
  OpticalLink out = link;
  for (const auto& s : setting.settings) {
    auto* amp = out.find_edfa(s.id);
    if (!amp) throw Error(Errc::NotFound, "edfa " + s.id);
    amp->gain_db = s.gain_db;
    amp->tilt_db = s.tilt_db;
  }
  return out;
}

GainTiltSetting optimize_gain_tilt(const OpticalLink& link, const CalibrationResult& calib, const ChannelGrid& grid,
                                   std::span<const double> launch_dbm, const GainTiltWeights& weights) {
  for (const auto* amp : link.edfas()) {
    if (!calib.find_edfa(amp->id)) throw Error(Errc::InconsistentPriors, "calibration lacks " + amp->id);
    if (amp->gain_range_db.min > amp->gain_range_db.max || amp->tilt_range_db.min > amp->tilt_range_db.max) {
      throw Error(Errc::InfeasibleRanges, amp->id + " has an empty actuator range");
    }
  }
  if (!(weights.lattice_db > 0.0)) throw Error(Errc::InfeasibleRanges, "lattice step must be positive");

  OpticalLink work = apply_calibration(link, calib);
  std::vector<EdfaUnit*> amps;
  for (auto& el : work.elements) {
    if (auto* amp = std::get_if<EdfaUnit>(&el)) {
      amp->gain_db = std::clamp(amp->gain_db, amp->gain_range_db.min, amp->gain_range_db.max);
      amp->tilt_db = std::clamp(amp->tilt_db, amp->tilt_range_db.min, amp->tilt_range_db.max);
      amps.push_back(amp);
    }
  }

  GainTiltSetting result;
  const auto base = final_edfa_spread(work, grid, launch_dbm);
  ++result.evaluations;
  result.baseline_flatness_db = base.flatness_db;
  result.baseline_mean_gsnr_db = base.mean_db;

  auto score = [&](const GsnrSpread& s) {
    return -s.flatness_db - weights.lambda * std::max(0.0, base.mean_db - s.mean_db);
  };
  // False when the trial setting overdrives an amplifier.
  auto evaluate = [&](double& best) {
    ++result.evaluations;
    try {
      best = score(final_edfa_spread(work, grid, launch_dbm));
      return true;
    } catch (const Error& e) {
      if (e.code() == Errc::PowerOutOfRange) return false;
      throw;
    }
  };

  // Lattice offsets from the anchor, so repeated steps do not accumulate rounding.
  std::vector<std::array<double, 2>> anchor;
  std::vector<std::array<int, 2>> offset(amps.size(), {0, 0});
  for (const auto* amp : amps) anchor.push_back({amp->gain_db, amp->tilt_db});

  double current = score(base);
  result.objective_history.push_back(current);
  int moves = 0;
  bool improved = true;
  while (improved && moves < weights.max_moves) {
    improved = false;
    for (std::size_t a = 0; a < amps.size(); ++a) {
      auto* amp = amps[a];
      for (int coord = 0; coord < 2; ++coord) {
        double& value = coord == 0 ? amp->gain_db : amp->tilt_db;
        const auto& range = coord == 0 ? amp->gain_range_db : amp->tilt_range_db;
        for (double dir : {+1.0, -1.0}) {
          // Keep stepping in one direction while it pays off.
          while (moves < weights.max_moves) {
            const double original = value;
            const int k = offset[a][coord] + static_cast<int>(dir);
            const double next = anchor[a][coord] + k * weights.lattice_db;
            if (next < range.min - 1e-9 || next > range.max + 1e-9) break;
            value = std::clamp(next, range.min, range.max);
            double trial = 0.0;
            if (evaluate(trial) && trial > current + weights.min_improvement) {
              current = trial;
              offset[a][coord] = k;
              result.objective_history.push_back(current);
              ++moves;
              improved = true;
            } else {
              value = original;
              break;
            }
          }
        }
      }
    }
  }

  for (const auto* amp : amps) result.settings.push_back({amp->id, amp->gain_db, amp->tilt_db});
  const auto final_spread = final_edfa_spread(work, grid, launch_dbm);
  result.flatness_db = final_spread.flatness_db;
  result.mean_gsnr_db = final_spread.mean_db;
  result.objective = current;
  return result;
}

}  // namespace dcx::monitor
