#include "dcx/monitor/delay.hpp"

#include <string>

#include "dcx/error.hpp"
#include "dcx/units.hpp"

namespace dcx::monitor {

double span_length_from_rtt(double rtt_us, double processing_offset_us, double n_group) {
  if (rtt_us <= processing_offset_us) {
    throw Error(Errc::NegativeLength, "rtt " + std::to_string(rtt_us) + " us <= offset");
  }
  if (!(n_group > 0.0)) throw Error(Errc::OutOfRange, "group index must be positive");
  return (rtt_us - processing_offset_us) * 1e-6 * units::kSpeedOfLightKmPerS / (2.0 * n_group);
}

}  // namespace dcx::monitor
