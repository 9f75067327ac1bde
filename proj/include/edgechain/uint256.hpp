#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <string>

#include "edgechain/bytes.hpp"

namespace edgechain {

using U256 = boost::multiprecision::uint256_t;
using U512 = boost::multiprecision::uint512_t;

inline const U256& u256_max() {
  static const U256 value = ~U256(0);
  return value;
}

inline U256 pow2(unsigned bits) { return U256(1) << bits; }

// Digests compare as unsigned big-endian integers.
inline Digest to_digest(const U256& v) {
  Digest out{};
  Bytes tmp;
  boost::multiprecision::export_bits(v, std::back_inserter(tmp), 8, true);
  std::copy(tmp.begin(), tmp.end(), out.begin() + (out.size() - tmp.size()));
  return out;
}

inline U256 from_digest(const Digest& d) {
  U256 v;
  boost::multiprecision::import_bits(v, d.begin(), d.end(), 8, true);
  return v;
}

inline std::string u256_hex(const U256& v) { return to_hex(to_digest(v)); }

inline U256 u256_from_hex(std::string_view hex) {
  std::string padded(hex);
  if (padded.size() > 64) throw Error(Errc::malformed, "256-bit value longer than 64 hex digits");
  padded.insert(0, 64 - padded.size(), '0');
  return from_digest(array_from_hex<32>(padded));
}

}  // namespace edgechain
