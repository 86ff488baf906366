#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace dcx::protocol {

using Json = nlohmann::json;

enum class MessageKind {
  RegisterTrx,
  AuthResult,
  CatalogRequest,
  CatalogAdvert,
  PathRequest,
  ProbeRequest,
  ProbeResult,
  ModeProposal,
  ConfigureTrx,
  ConfigureAck,
  CommitRequest,
  Decision,
  Error,
};

enum class Party { UserA, UserB, Carrier, Operator };

std::string_view to_string(MessageKind kind) noexcept;
std::string_view to_string(Party party) noexcept;
std::optional<MessageKind> parse_message_kind(std::string_view s) noexcept;
std::optional<Party> parse_party(std::string_view s) noexcept;

struct ProtocolMessage {
  MessageKind kind = MessageKind::Error;
  std::string session_id;
  Party from = Party::Carrier;
  Party to = Party::Carrier;
  Json payload = Json::object();

  bool operator==(const ProtocolMessage&) const = default;
};

/// Empty when the payload carries every field its kind requires with the right type.
std::string check_payload(MessageKind kind, const Json& payload);

Json to_json(const ProtocolMessage& m);
/// Throws ProtocolViolation on unknown kinds/parties or a malformed payload.
ProtocolMessage message_from_json(const Json& j);

ProtocolMessage make_message(MessageKind kind, const std::string& session_id, Party from, Party to,
                             Json payload = Json::object());

}  // namespace dcx::protocol
