#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace edgechain {

using DeviceId = std::string;
using CommunityId = std::uint32_t;

enum class Role : std::uint8_t { infrastructure = 1, edge_node = 2, authority = 3 };

constexpr std::string_view role_name(Role r) noexcept {
  switch (r) {
    case Role::infrastructure: return "infrastructure";
    case Role::edge_node: return "edge_node";
    case Role::authority: return "authority";
  }
  return "unknown";
}

// Message status: -1 failed to accept, 0 under processing, 1 accepted.
enum class Status : std::int8_t { failed = -1, processing = 0, accepted = 1 };

constexpr bool is_terminal(Status s) noexcept { return s != Status::processing; }

}  // namespace edgechain
