#include "dcx/error.hpp"

namespace dcx {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::UnknownSite: return "UnknownSite";
    case Errc::UnknownLink: return "UnknownLink";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::PowerOutOfRange: return "PowerOutOfRange";
    case Errc::DegenerateDispersion: return "DegenerateDispersion";
    case Errc::EmptyList: return "EmptyList";
    case Errc::TrxDominated: return "TrxDominated";
    case Errc::Underdetermined: return "Underdetermined";
    case Errc::NonPhysical: return "NonPhysical";
    case Errc::NoFeasibleMode: return "NoFeasibleMode";
    case Errc::NoCommonMode: return "NoCommonMode";
    case Errc::NoAalAttachment: return "NoAalAttachment";
    case Errc::SpectrumExhausted: return "SpectrumExhausted";
    case Errc::MissingSegmentData: return "MissingSegmentData";
    case Errc::UnknownFault: return "UnknownFault";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::InconsistentPriors: return "InconsistentPriors";
    case Errc::InfeasibleRanges: return "InfeasibleRanges";
    case Errc::NoBaseline: return "NoBaseline";
    case Errc::NegativeLength: return "NegativeLength";
    case Errc::ProtocolViolation: return "ProtocolViolation";
    case Errc::NoInteroperableMode: return "NoInteroperableMode";
    case Errc::AuthFailed: return "AuthFailed";
    case Errc::NotPending: return "NotPending";
    case Errc::SpectrumConflict: return "SpectrumConflict";
    case Errc::Timeout: return "Timeout";
    case Errc::BindFailure: return "BindFailure";
    case Errc::StepFailure: return "StepFailure";
    case Errc::UnknownTarget: return "UnknownTarget";
    case Errc::CorruptLog: return "CorruptLog";
    case Errc::NotFound: return "NotFound";
  }
  return "Unknown";
}

namespace {
std::string compose(Errc code, const std::string& detail) {
  std::string msg{to_string(code)};
  if (!detail.empty()) {
    msg += ": ";
    msg += detail;
  }
  return msg;
}
}  // namespace

std::optional<Errc> parse_errc(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(Errc::NotFound); ++i) {
    const auto code = static_cast<Errc>(i);
    if (to_string(code) == name) return code;
  }
  return std::nullopt;
}

Error::Error(Errc code, std::string detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(std::move(detail)) {}

}  // namespace dcx
