#pragma once

#include "dcx/linetwin/twin.hpp"

namespace dcx::monitor {

/// length = (rtt - offset) * c / (2 n). Throws NegativeLength when rtt <= offset.
double span_length_from_rtt(double rtt_us, double processing_offset_us = 0.0,
                            double n_group = linetwin::kDefaultGroupIndex);

}  // namespace dcx::monitor
