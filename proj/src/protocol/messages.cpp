#include "dcx/protocol/messages.hpp"

#include <array>
#include <utility>

#include "dcx/error.hpp"

namespace dcx::protocol {

namespace {

constexpr std::array<std::pair<MessageKind, std::string_view>, 13> kKinds{{
    {MessageKind::RegisterTrx, "RegisterTrx"},
    {MessageKind::AuthResult, "AuthResult"},
    {MessageKind::CatalogRequest, "CatalogRequest"},
    {MessageKind::CatalogAdvert, "CatalogAdvert"},
    {MessageKind::PathRequest, "PathRequest"},
    {MessageKind::ProbeRequest, "ProbeRequest"},
    {MessageKind::ProbeResult, "ProbeResult"},
    {MessageKind::ModeProposal, "ModeProposal"},
    {MessageKind::ConfigureTrx, "ConfigureTrx"},
    {MessageKind::ConfigureAck, "ConfigureAck"},
    {MessageKind::CommitRequest, "CommitRequest"},
    {MessageKind::Decision, "Decision"},
    {MessageKind::Error, "Error"},
}};

constexpr std::array<std::pair<Party, std::string_view>, 4> kParties{{
    {Party::UserA, "UA_A"},
    {Party::UserB, "UA_B"},
    {Party::Carrier, "CARRIER"},
    {Party::Operator, "OPERATOR"},
}};

enum class FieldType { String, Number, Integer, Boolean, Array, Object };

struct Field {
  std::string_view name;
  FieldType type;
};

bool has_type(const Json& v, FieldType t) {
  switch (t) {
    case FieldType::String: return v.is_string();
    case FieldType::Number: return v.is_number();
    case FieldType::Integer: return v.is_number_integer();
    case FieldType::Boolean: return v.is_boolean();
    case FieldType::Array: return v.is_array();
    case FieldType::Object: return v.is_object();
  }
  return false;
}

std::vector<Field> required_fields(MessageKind kind) {
  using T = FieldType;
  switch (kind) {
    case MessageKind::RegisterTrx: return {{"serial", T::String}, {"site_id", T::String}};
    case MessageKind::AuthResult: return {{"ok", T::Boolean}};
    case MessageKind::CatalogRequest: return {};
    case MessageKind::CatalogAdvert: return {{"trx_id", T::String}, {"probe_mode_id", T::String}, {"modes", T::Array}};
    case MessageKind::PathRequest: return {{"site_a", T::String}, {"site_b", T::String}};
    case MessageKind::ProbeRequest:
      return {{"segment", T::Integer}, {"links", T::Array}, {"probe_mode_id", T::String}, {"channel", T::Integer}};
    case MessageKind::ProbeResult:
      return {{"segment", T::Integer}, {"snr_meas_db", T::Number}, {"rx_power_dbm", T::Number}};
    case MessageKind::ModeProposal:
      return {{"mode_ids", T::Array}, {"gsnr_db", T::Number}, {"rx_power_dbm", T::Number}, {"channel", T::Integer}};
    case MessageKind::ConfigureTrx: return {{"mode_id", T::String}, {"channel", T::Integer}, {"route_id", T::String}};
    case MessageKind::ConfigureAck: return {{"trx_id", T::String}, {"mode_id", T::String}};
    case MessageKind::CommitRequest: return {{"route_id", T::String}, {"mode_id", T::String}, {"channel", T::Integer}};
    case MessageKind::Decision: return {{"verdict", T::String}, {"reason", T::String}};
    case MessageKind::Error: return {{"code", T::String}, {"detail", T::String}};
  }
  return {};
}

}  // namespace

std::string_view to_string(MessageKind kind) noexcept {
  for (const auto& [k, s] : kKinds) {
    if (k == kind) return s;
  }
  return "?";
}

std::string_view to_string(Party party) noexcept {
  for (const auto& [p, s] : kParties) {
    if (p == party) return s;
  }
  return "?";
}

std::optional<MessageKind> parse_message_kind(std::string_view s) noexcept {
  for (const auto& [k, name] : kKinds) {
    if (name == s) return k;
  }
  return std::nullopt;
}

std::optional<Party> parse_party(std::string_view s) noexcept {
  for (const auto& [p, name] : kParties) {
    if (name == s) return p;
  }
  return std::nullopt;
}

std::string check_payload(MessageKind kind, const Json& payload) {
  if (!payload.is_object()) return "payload must be an object";
  for (const auto& f : required_fields(kind)) {
    auto it = payload.find(std::string(f.name));
    if (it == payload.end()) return "missing payload." + std::string(f.name);
    if (!has_type(*it, f.type)) return "payload." + std::string(f.name) + " has the wrong type";
  }
  if (kind == MessageKind::Decision) {
    const auto v = payload.at("verdict").get<std::string>();
    if (v != "approve" && v != "rollback") return "verdict must be approve or rollback";
  }
  if (kind == MessageKind::Error && !parse_errc(payload.at("code").get<std::string>())) return "unknown error code";
  return {};
}

Json to_json(const ProtocolMessage& m) {
  return Json{{"kind", to_string(m.kind)},
              {"session_id", m.session_id},
              {"from", to_string(m.from)},
              {"to", to_string(m.to)},
              {"payload", m.payload}};
}

ProtocolMessage message_from_json(const Json& j) {
  auto text = [&](const char* key) -> std::string {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) {
      throw Error(Errc::ProtocolViolation, std::string("message.") + key + " missing");
    }
    return j.at(key).get<std::string>();
  };
  ProtocolMessage m;
  const auto kind = parse_message_kind(text("kind"));
  if (!kind) throw Error(Errc::ProtocolViolation, "unknown message kind " + text("kind"));
  const auto from = parse_party(text("from"));
  const auto to = parse_party(text("to"));
  if (!from || !to) throw Error(Errc::ProtocolViolation, "unknown party");
  m.kind = *kind;
  m.session_id = text("session_id");
  m.from = *from;
  m.to = *to;
  m.payload = j.contains("payload") ? j.at("payload") : Json::object();
  if (auto why = check_payload(m.kind, m.payload); !why.empty()) throw Error(Errc::ProtocolViolation, why);
  return m;
}

ProtocolMessage make_message(MessageKind kind, const std::string& session_id, Party from, Party to, Json payload) {
  return {kind, session_id, from, to, std::move(payload)};
}

}  // namespace dcx::protocol
