#include "dcx/qot/link_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dcx/error.hpp"
#include "dcx/units.hpp"

namespace dcx::qot {

using netmodel::EdfaUnit;
using netmodel::FiberSpan;
using netmodel::RoadmUnit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPosEps = 1e-9;

void scale(ChannelState& s, std::size_t i, double factor) {
  s.sig_mw[i] *= factor;
  s.ase_mw[i] *= factor;
  s.nli_mw[i] *= factor;
}

double sum_losses_db(const std::vector<ExtraLoss>& losses) {
  double db = 0.0;
  for (const auto& l : losses) db += l.loss_db;
  return db;
}

struct SpanLosses {
  std::vector<ExtraLoss> start;
  std::vector<ExtraLoss> mid;
  std::vector<ExtraLoss> end;
};

// A loss at distance d belongs to the first span with start <= d < end; at the
// span start it precedes the fiber (after any amplifier at that point). A loss
// at the very end of the link lands on the output of the last span.
std::vector<SpanLosses> assign_losses(const OpticalLink& link, const std::vector<ExtraLoss>& losses) {
  std::vector<SpanLosses> out(link.elements.size());
  const double total = link.length_km();
  for (const auto& loss : losses) {
    if (loss.distance_km < -kPosEps || loss.distance_km > total + kPosEps) {
      throw Error(Errc::OutOfRange, "loss position outside link " + link.id);
    }
    double pos = 0.0;
    std::size_t last_span = link.elements.size();
    bool placed = false;
    for (std::size_t e = 0; e < link.elements.size() && !placed; ++e) {
      const auto* span = std::get_if<FiberSpan>(&link.elements[e]);
      if (!span) continue;
      last_span = e;
      const double start = pos;
      const double end = pos + span->length_km;
      if (std::abs(loss.distance_km - start) <= kPosEps) {
        out[e].start.push_back(loss);
        placed = true;
      } else if (loss.distance_km > start && loss.distance_km < end - kPosEps) {
        out[e].mid.push_back(loss);
        placed = true;
      }
      pos = end;
    }
    if (!placed) {
      if (last_span == link.elements.size()) throw Error(Errc::OutOfRange, "link " + link.id + " has no spans");
      out[last_span].end.push_back(loss);
    }
  }
  for (auto& s : out) {
    std::sort(s.mid.begin(), s.mid.end(),
              [](const ExtraLoss& a, const ExtraLoss& b) { return a.distance_km < b.distance_km; });
  }
  return out;
}

std::vector<double> gsnr_of(const ChannelState& s, const ChannelGrid& grid) {
  const double ase_to_signal_bw = grid.symbol_rate_gbaud / grid.spacing_ghz;
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double noise = s.ase_mw[i] * ase_to_signal_bw + s.nli_mw[i];
    out[i] = noise > 0.0 ? s.sig_mw[i] / noise : kInf;
  }
  return out;
}

}  // namespace

ChannelState ChannelState::from_launch(std::span<const double> launch_dbm) {
  ChannelState s;
  s.sig_mw.reserve(launch_dbm.size());
  for (double p : launch_dbm) s.sig_mw.push_back(units::dbm_to_mw(p));
  s.ase_mw.assign(launch_dbm.size(), 0.0);
  s.nli_mw.assign(launch_dbm.size(), 0.0);
  return s;
}

double ChannelState::total_mw() const {
  double total = 0.0;
  for (std::size_t i = 0; i < sig_mw.size(); ++i) total += sig_mw[i] + ase_mw[i];
  return total;
}

double beta2_ps2_per_km(double dispersion_ps_nm_km, double frequency_thz) {
  const double c = units::kSpeedOfLight;
  const double lambda_m = c / (frequency_thz * 1e12);
  const double d_si = dispersion_ps_nm_km * 1e-6;  // s/m^2
  const double beta2_s2_per_m = -d_si * lambda_m * lambda_m / (2.0 * std::numbers::pi * c);
  return beta2_s2_per_m * 1e3 * 1e24;
}

double span_nli_mw(const FiberSpan& span, double channel_power_mw, double frequency_thz, const ChannelGrid& grid) {
  if (span.gamma_per_w_km == 0.0) return 0.0;
  const double beta2_ps = beta2_ps2_per_km(span.dispersion_ps_nm_km, frequency_thz);
  if (std::abs(beta2_ps) < 1e-6) throw Error(Errc::DegenerateDispersion, "|beta2| < 1e-6 ps^2/km");
  const double pi = std::numbers::pi;
  const double beta2 = std::abs(beta2_ps) * 1e-24;  // s^2/km
  const double alpha = units::alpha_per_km(span.attenuation_db_per_km);
  const double l_eff = (1.0 - std::exp(-alpha * span.length_km)) / alpha;
  const double l_eff_a = 1.0 / alpha;
  const double rs = grid.symbol_rate_gbaud * 1e9;
  const double bwdm = grid.occupied_bandwidth_ghz() * 1e9;
  const double psd = channel_power_mw * 1e-3 / rs;  // W/Hz
  const double gamma = span.gamma_per_w_km;
  const double g_nli = (8.0 / 27.0) * gamma * gamma * psd * psd * psd * l_eff * l_eff *
                       std::asinh(pi * pi / 2.0 * beta2 * l_eff_a * bwdm * bwdm) / (pi * beta2 * l_eff_a);
  return g_nli * rs * 1e3;
}

double ase_power_mw(double frequency_thz, double nf_db, double gain_lin, double bandwidth_ghz) {
  return units::kPlanck * frequency_thz * 1e12 * units::db_to_lin(nf_db) * (gain_lin - 1.0) * bandwidth_ghz * 1e9 *
         1e3;
}

LinkTrace trace_link(const OpticalLink& link, const ChannelGrid& grid, const ChannelState& input,
                     const Perturbation& perturbation) {
  const auto n = static_cast<std::size_t>(grid.count);
  if (input.sig_mw.size() != n || input.ase_mw.size() != n || input.nli_mw.size() != n) {
    throw Error(Errc::GridMismatch, "launch has " + std::to_string(input.sig_mw.size()) + " channels, grid " +
                                        std::to_string(n));
  }
  const auto span_losses = assign_losses(link, perturbation.losses);

  LinkTrace trace;
  trace.grid = grid;
  trace.input = input;
  ChannelState state = input;
  double pos = 0.0;

  for (std::size_t e = 0; e < link.elements.size(); ++e) {
    ElementRecord rec;
    rec.element_index = e;
    rec.in = state;
    rec.start_km = pos;

    if (const auto* span = std::get_if<FiberSpan>(&link.elements[e])) {
      rec.kind = ElementKind::Span;
      const auto& losses = span_losses[e];
      const double head = units::db_to_lin(-(span->conn_in_db + sum_losses_db(losses.start)));
      for (std::size_t i = 0; i < n; ++i) scale(state, i, head);
      rec.fiber_in_sig_mw = state.sig_mw;
      rec.mid_losses = losses.mid;
      rec.conn_out_db = span->conn_out_db;
      rec.end_loss_db = sum_losses_db(losses.end);

      const double tail_db = sum_losses_db(losses.mid) + span->conn_out_db + rec.end_loss_db;
      rec.alpha_per_km.resize(n);
      rec.nli_added_mw.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double f = grid.frequency_thz(static_cast<int>(i));
        const double nli_new = span_nli_mw(*span, state.sig_mw[i], f, grid);
        state.nli_mw[i] += nli_new;
        const double att_db_km =
            span->attenuation_db_per_km + span->loss_tilt_db * grid.normalized_offset(static_cast<int>(i)) /
                                              span->length_km;
        rec.alpha_per_km[i] = units::alpha_per_km(att_db_km);
        const double factor = std::exp(-rec.alpha_per_km[i] * span->length_km) * units::db_to_lin(-tail_db);
        scale(state, i, factor);
        rec.nli_added_mw[i] = nli_new * factor;
      }
      pos += span->length_km;
    } else if (const auto* amp = std::get_if<EdfaUnit>(&link.elements[e])) {
      rec.kind = ElementKind::Edfa;
      rec.id = amp->id;
      auto delta = perturbation.nf_delta_db.find(amp->id);
      rec.nf_db = amp->nf_at(amp->gain_db) + (delta == perturbation.nf_delta_db.end() ? 0.0 : delta->second);

      // Total-power gain control: sum_i g_i (s_i + a_i) + sum_i n_i (g_i - 1) = G * T_in
      // with g_i = k * t_i, which is linear in k.
      std::vector<double> shape(n), unit_ase(n);
      double sum_unit_ase = 0.0;
      double denom = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const int ch = static_cast<int>(i);
        shape[i] = units::db_to_lin(amp->tilt_db * grid.normalized_offset(ch));
        unit_ase[i] = ase_power_mw(grid.frequency_thz(ch), rec.nf_db, 2.0, grid.spacing_ghz);
        sum_unit_ase += unit_ase[i];
        denom += shape[i] * (state.sig_mw[i] + state.ase_mw[i] + unit_ase[i]);
      }
      const double g_total = units::db_to_lin(amp->gain_db);
      const double k = (g_total * state.total_mw() + sum_unit_ase) / denom;
      rec.gain_db.resize(n);
      rec.ase_added_mw.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double g = k * shape[i];
        const double ase_new = std::max(0.0, unit_ase[i] * (g - 1.0));
        state.sig_mw[i] *= g;
        state.nli_mw[i] *= g;
        state.ase_mw[i] = state.ase_mw[i] * g + ase_new;
        rec.gain_db[i] = units::lin_to_db(g);
        rec.ase_added_mw[i] = ase_new;
      }
      const double out_dbm = units::mw_to_dbm(state.total_mw());
      if (out_dbm > amp->max_total_out_dbm + 1e-9) {
        throw Error(Errc::PowerOutOfRange, amp->id + " total output " + std::to_string(out_dbm) + " dBm");
      }
    } else if (const auto* roadm = std::get_if<RoadmUnit>(&link.elements[e])) {
      rec.kind = ElementKind::Roadm;
      rec.id = roadm->id;
      const double factor = units::db_to_lin(-roadm->insertion_loss_db);
      for (std::size_t i = 0; i < n; ++i) scale(state, i, factor);
    }
    rec.end_km = pos;
    rec.out = state;
    trace.elements.push_back(std::move(rec));
  }
  return trace;
}

LinkTrace trace_link(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm,
                     const Perturbation& perturbation) {
  return trace_link(link, grid, ChannelState::from_launch(launch_dbm), perturbation);
}

std::vector<double> ase_snr(const LinkTrace& trace) {
  const auto& out = trace.output();
  const double to_signal_bw = trace.grid.symbol_rate_gbaud / trace.grid.spacing_ghz;
  std::vector<double> r(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    r[i] = out.ase_mw[i] > 0.0 ? out.sig_mw[i] / (out.ase_mw[i] * to_signal_bw) : kInf;
  }
  return r;
}

std::vector<double> nli_snr(const LinkTrace& trace) {
  const auto& out = trace.output();
  std::vector<double> r(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) r[i] = out.nli_mw[i] > 0.0 ? out.sig_mw[i] / out.nli_mw[i] : kInf;
  return r;
}

std::vector<double> gsnr(const LinkTrace& trace) { return gsnr_of(trace.output(), trace.grid); }

std::vector<double> osnr_db(const LinkTrace& trace) {
  const auto& out = trace.output();
  const double to_ref_bw = units::kOsnrReferenceGhz / trace.grid.spacing_ghz;
  std::vector<double> r(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    r[i] = out.ase_mw[i] > 0.0 ? units::lin_to_db(out.sig_mw[i] / (out.ase_mw[i] * to_ref_bw)) : kInf;
  }
  return r;
}

std::vector<double> incremental_gsnr(const LinkTrace& trace) {
  const auto& in = trace.input;
  const auto& out = trace.output();
  const double to_signal_bw = trace.grid.symbol_rate_gbaud / trace.grid.spacing_ghz;
  std::vector<double> r(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double net = out.sig_mw[i] / in.sig_mw[i];
    const double ase = out.ase_mw[i] - in.ase_mw[i] * net;
    const double nli = out.nli_mw[i] - in.nli_mw[i] * net;
    const double noise = ase * to_signal_bw + nli;
    r[i] = noise > 0.0 ? out.sig_mw[i] / noise : kInf;
  }
  return r;
}

std::vector<double> ase_snr(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm) {
  return ase_snr(trace_link(link, grid, launch_dbm));
}

std::vector<double> nli_snr(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm) {
  return nli_snr(trace_link(link, grid, launch_dbm));
}

LinkGsnr link_gsnr(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm,
                   const Perturbation& perturbation) {
  const auto trace = trace_link(link, grid, launch_dbm, perturbation);
  LinkGsnr r;
  r.gsnr = gsnr(trace);
  for (const auto& rec : trace.elements) {
    if (rec.kind == ElementKind::Edfa) r.accumulated.push_back({rec.id, gsnr_of(rec.out, grid)});
  }
  return r;
}

double optimal_launch_dbm(const OpticalLink& link, const ChannelGrid& grid, int channel, double lo_dbm,
                          double hi_dbm) {
  auto objective = [&](double p) {
    std::vector<double> launch(static_cast<std::size_t>(grid.count), p);
    return gsnr(trace_link(link, grid, launch))[static_cast<std::size_t>(channel)];
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo_dbm;
  double b = hi_dbm;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = objective(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace dcx::qot
