#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgechain {

enum class Errc {
  // identity
  duplicate_device,
  unknown_issuer,
  unknown_community,
  invalid_device_id,
  wallet_collision,
  // messaging
  unregistered_party,
  empty_content,
  insufficient_supporters,
  not_endorsed,
  invalid_transition,
  // ledger
  empty_leaves,
  index_out_of_range,
  unsorted_transactions,
  invalid_block,
  // consensus
  no_ballots,
  nonce_exhausted,
  zero_target,
  nonpositive_time,
  // rewards
  insufficient_balance,
  unknown_account,
  // simnet / cli
  invalid_config,
  non_terminal_messages,
  missing_file,
  schema_violation,
  malformed,
  invariant_violation,
};

constexpr std::string_view errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::duplicate_device: return "DuplicateDevice";
    case Errc::unknown_issuer: return "UnknownIssuer";
    case Errc::unknown_community: return "UnknownCommunity";
    case Errc::invalid_device_id: return "InvalidDeviceId";
    case Errc::wallet_collision: return "WalletCollision";
    case Errc::unregistered_party: return "UnregisteredParty";
    case Errc::empty_content: return "EmptyContent";
    case Errc::insufficient_supporters: return "InsufficientSupporters";
    case Errc::not_endorsed: return "NotEndorsed";
    case Errc::invalid_transition: return "InvalidTransition";
    case Errc::empty_leaves: return "EmptyLeaves";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::unsorted_transactions: return "UnsortedTransactions";
    case Errc::invalid_block: return "InvalidBlock";
    case Errc::no_ballots: return "NoBallots";
    case Errc::nonce_exhausted: return "NonceExhausted";
    case Errc::zero_target: return "ZeroTarget";
    case Errc::nonpositive_time: return "NonpositiveTime";
    case Errc::insufficient_balance: return "InsufficientBalance";
    case Errc::unknown_account: return "UnknownAccount";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::non_terminal_messages: return "NonTerminalMessages";
    case Errc::missing_file: return "MissingFile";
    case Errc::schema_violation: return "SchemaViolation";
    case Errc::malformed: return "Malformed";
    case Errc::invariant_violation: return "InvariantViolation";
  }
  return "Unknown";
}

// All library failures surface as this exception; code() identifies the
// contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace edgechain
