#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dcx/netmodel/topology.hpp"

namespace dcx::qot {

using netmodel::ChannelGrid;
using netmodel::OpticalLink;

/// Per-channel powers in mW. ASE is held in the channel slot bandwidth
/// (grid spacing); NLI in the signal bandwidth (symbol rate).
struct ChannelState {
  std::vector<double> sig_mw;
  std::vector<double> ase_mw;
  std::vector<double> nli_mw;

  static ChannelState from_launch(std::span<const double> launch_dbm);
  double total_mw() const;  // signal + ASE
  std::size_t size() const { return sig_mw.size(); }
};

/// Lumped loss placed at a distance along the link.
struct ExtraLoss {
  double distance_km = 0.0;
  double loss_db = 0.0;
};

/// Deviations from the declared link used by the twin to inject faults.
struct Perturbation {
  std::vector<ExtraLoss> losses;
  std::map<std::string, double> nf_delta_db;
};

enum class ElementKind { Span, Edfa, Roadm };

struct ElementRecord {
  std::size_t element_index = 0;
  ElementKind kind = ElementKind::Span;
  std::string id;  // empty for spans
  double start_km = 0.0;
  double end_km = 0.0;
  ChannelState in;
  ChannelState out;
  // Spans: signal power entering the fiber (after input connector and any loss at
  // the span start), per-channel attenuation (1/km) and mid-span losses.
  std::vector<double> fiber_in_sig_mw;
  std::vector<double> alpha_per_km;
  std::vector<ExtraLoss> mid_losses;
  double conn_out_db = 0.0;
  double end_loss_db = 0.0;
  // EDFAs: applied per-channel gain and effective noise figure.
  std::vector<double> gain_db;
  double nf_db = 0.0;
  std::vector<double> ase_added_mw;
  std::vector<double> nli_added_mw;
};

struct LinkTrace {
  ChannelGrid grid;
  ChannelState input;
  std::vector<ElementRecord> elements;

  const ChannelState& output() const { return elements.empty() ? input : elements.back().out; }
};

/// Element-by-element propagation. EDFAs hold the total (signal + ASE) power gain
/// at gain_db and distribute it with a linear-in-frequency dB tilt. Throws
/// PowerOutOfRange when an EDFA exceeds its total output limit and
/// DegenerateDispersion for a nonlinear span with |beta2| < 1e-6 ps^2/km.
LinkTrace trace_link(const OpticalLink& link, const ChannelGrid& grid, const ChannelState& input,
                     const Perturbation& perturbation = {});
LinkTrace trace_link(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm,
                     const Perturbation& perturbation = {});

/// Group-velocity dispersion in ps^2/km at the given frequency.
double beta2_ps2_per_km(double dispersion_ps_nm_km, double frequency_thz);

/// NLI power (mW, in the symbol-rate bandwidth) generated by one span for a
/// channel of the given power, incoherent GN closed form with flat PSD.
double span_nli_mw(const netmodel::FiberSpan& span, double channel_power_mw, double frequency_thz,
                   const ChannelGrid& grid);

/// ASE power (mW) in `bandwidth_ghz` produced by an amplifier of linear gain `gain_lin`.
double ase_power_mw(double frequency_thz, double nf_db, double gain_lin, double bandwidth_ghz);

/// Per-channel SNR terms at the trace output, signal bandwidth. +inf where absent.
std::vector<double> ase_snr(const LinkTrace& trace);
std::vector<double> nli_snr(const LinkTrace& trace);
std::vector<double> gsnr(const LinkTrace& trace);
/// OSNR (dB) referenced to 12.5 GHz at the trace output.
std::vector<double> osnr_db(const LinkTrace& trace);
/// GSNR of the noise added by this trace alone (input noise discounted).
std::vector<double> incremental_gsnr(const LinkTrace& trace);

std::vector<double> ase_snr(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm);
std::vector<double> nli_snr(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm);

struct AccumulatedGsnr {
  std::string edfa_id;
  std::vector<double> gsnr;  // linear, per channel, at the EDFA output
};

struct LinkGsnr {
  std::vector<double> gsnr;  // linear, per channel, at the link output
  std::vector<AccumulatedGsnr> accumulated;
};

LinkGsnr link_gsnr(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm,
                   const Perturbation& perturbation = {});

/// Flat per-channel launch maximising the GSNR of `channel`, by golden-section
/// search over [lo_dbm, hi_dbm].
double optimal_launch_dbm(const OpticalLink& link, const ChannelGrid& grid, int channel, double lo_dbm,
                          double hi_dbm);

}  // namespace dcx::qot
