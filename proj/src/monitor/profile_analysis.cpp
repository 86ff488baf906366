#include "dcx/monitor/profile_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcx/error.hpp"

namespace dcx::monitor {

namespace {

struct Step {
  std::size_t index = 0;
  double magnitude = 0.0;
};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Robust noise sigma from second differences, insensitive to slopes and to
// isolated steps.
double noise_sigma(const std::vector<double>& y) {
  if (y.size() < 3) return 0.0;
  std::vector<double> d2;
  d2.reserve(y.size() - 2);
  for (std::size_t i = 1; i + 1 < y.size(); ++i) d2.push_back(y[i + 1] - 2.0 * y[i] + y[i - 1]);
  const double m = median(d2);
  for (auto& v : d2) v = std::abs(v - m);
  return 1.4826 * median(d2) / std::sqrt(6.0);
}

// Two-sided windowed mean difference; runs above threshold collapse to their peak.
std::vector<Step> find_steps(const std::vector<double>& y, double min_step, double sign) {
  const auto w = static_cast<std::size_t>(kStepWindow);
  std::vector<Step> out;
  if (y.size() < 2 * w) return out;

  std::vector<double> prefix(y.size() + 1, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) prefix[i + 1] = prefix[i] + y[i];
  auto mean = [&](std::size_t a, std::size_t b) { return (prefix[b] - prefix[a]) / static_cast<double>(b - a); };

  bool in_run = false;
  Step best;
  for (std::size_t i = w; i + w <= y.size(); ++i) {
    const double s = sign * (mean(i, i + w) - mean(i - w, i));
    if (s >= min_step) {
      if (!in_run || s > best.magnitude) best = {i, s};
      in_run = true;
    } else if (in_run) {
      out.push_back(best);
      in_run = false;
    }
  }
  if (in_run) out.push_back(best);

  // Move each peak to the nearby sample where the data crosses half magnitude.
  for (auto& step : out) {
    const auto j = step.index;
    const double mid = 0.5 * (mean(j, j + w) + mean(j - w, j));
    auto after = [&](std::size_t k) { return sign * (y[k] - mid) >= 0.0; };
    std::size_t best_k = j;
    std::size_t best_dist = w;
    for (std::size_t k = j - w / 2; k <= j + w / 2 && k < y.size(); ++k) {
      if (k == 0 || !after(k) || after(k - 1)) continue;
      const auto dist = k > j ? k - j : j - k;
      if (dist < best_dist) {
        best_dist = dist;
        best_k = k;
      }
    }
    step.index = best_k;
  }
  return out;
}

double confidence_of(double magnitude, double sigma) {
  const double se = sigma * std::sqrt(2.0 / kStepWindow);
  if (se <= 0.0) return 1.0;
  const double z = magnitude / se;
  return z / (1.0 + z);
}

}  // namespace

std::vector<LossEvent> localize_step_loss(const PowerProfile& baseline, const PowerProfile& current,
                                          double min_step_db) {
  if (baseline.size() != current.size()) throw Error(Errc::GridMismatch, "sample counts differ");
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    if (std::abs(baseline.distance_km[i] - current.distance_km[i]) > 1e-9) {
      throw Error(Errc::GridMismatch, "distance mismatch at sample " + std::to_string(i));
    }
  }
  std::vector<double> diff(current.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = current.relative_power_db[i] - baseline.relative_power_db[i];
  }
  const double sigma = noise_sigma(diff);
  std::vector<LossEvent> events;
  for (const auto& step : find_steps(diff, min_step_db, -1.0)) {
    events.push_back({current.distance_km[step.index], step.magnitude, confidence_of(step.magnitude, sigma)});
  }
  return events;
}

std::vector<double> detect_amplifier_positions(const PowerProfile& profile, double min_jump_db) {
  std::vector<double> out;
  for (const auto& step : find_steps(profile.relative_power_db, min_jump_db, 1.0)) {
    out.push_back(profile.distance_km[step.index]);
  }
  return out;
}

namespace {

// Prefix sums giving O(1) least-squares line fits on any index range.
class LineFitter {
 public:
  LineFitter(const std::vector<double>& x, const std::vector<double>& y) : n_(x.size() + 1) {
    for (auto* v : {&sx_, &sy_, &sxx_, &sxy_, &syy_}) v->assign(n_, 0.0);
    // Centre x for numerical stability.
    x0_ = x.empty() ? 0.0 : x.front();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x[i] - x0_;
      sx_[i + 1] = sx_[i] + xi;
      sy_[i + 1] = sy_[i] + y[i];
      sxx_[i + 1] = sxx_[i] + xi * xi;
      sxy_[i + 1] = sxy_[i] + xi * y[i];
      syy_[i + 1] = syy_[i] + y[i] * y[i];
    }
  }

  struct Line {
    double slope = 0.0;
    double intercept = 0.0;  // at x0
    double sse = 0.0;
  };

  Line fit(std::size_t a, std::size_t b) const {
    const double n = static_cast<double>(b - a);
    const double sx = sx_[b] - sx_[a], sy = sy_[b] - sy_[a];
    const double sxx = sxx_[b] - sxx_[a], sxy = sxy_[b] - sxy_[a], syy = syy_[b] - syy_[a];
    const double vxx = sxx - sx * sx / n;
    Line l;
    l.slope = vxx > 0.0 ? (sxy - sx * sy / n) / vxx : 0.0;
    l.intercept = (sy - l.slope * sx) / n;
    const double vyy = syy - sy * sy / n;
    const double vxy = sxy - sx * sy / n;
    l.sse = std::max(0.0, vyy - l.slope * vxy);
    return l;
  }

  double x0() const { return x0_; }

 private:
  std::size_t n_;
  double x0_ = 0.0;
  std::vector<double> sx_, sy_, sxx_, sxy_, syy_;
};

}  // namespace

DenoisedProfile denoise_profile(const PowerProfile& profile) {
  const auto& x = profile.distance_km;
  const auto& y = profile.relative_power_db;
  if (x.size() < 20) throw Error(Errc::OutOfRange, "denoise needs at least 20 samples");

  DenoisedProfile out;
  out.noise_sigma_db = noise_sigma(y);
  const LineFitter fitter(x, y);
  const double n = static_cast<double>(x.size());
  // Penalty per inserted change point (two line parameters plus the location).
  const double penalty = std::max(4.0 * std::log(n) * out.noise_sigma_db * out.noise_sigma_db, 1e-10);
  constexpr std::size_t kMinSegment = 2;

  std::vector<std::size_t> bounds{0, x.size()};
  while (true) {
    double best_gain = 0.0;
    std::size_t best_split = 0;
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
      const auto a = bounds[s];
      const auto b = bounds[s + 1];
      if (b - a < 2 * kMinSegment) continue;
      const double whole = fitter.fit(a, b).sse;
      for (std::size_t k = a + kMinSegment; k + kMinSegment <= b; ++k) {
        const double gain = whole - fitter.fit(a, k).sse - fitter.fit(k, b).sse;
        if (gain > best_gain) {
          best_gain = gain;
          best_split = k;
        }
      }
    }
    if (best_gain <= penalty) break;
    bounds.insert(std::upper_bound(bounds.begin(), bounds.end(), best_split), best_split);
  }

  out.profile = profile;
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const auto a = bounds[s];
    const auto b = bounds[s + 1];
    const auto line = fitter.fit(a, b);
    for (std::size_t i = a; i < b; ++i) {
      out.profile.relative_power_db[i] = line.intercept + line.slope * (x[i] - fitter.x0());
    }
    out.segments.push_back({x[a], x[b - 1], line.slope, line.intercept + line.slope * (x[a] - fitter.x0())});
    if (s > 0) out.change_points_km.push_back(x[a]);
  }
  return out;
}

}  // namespace dcx::monitor
