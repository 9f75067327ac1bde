#pragma once

#include <sodium.h>

#include <array>
#include <compare>
#include <cstdint>
#include <span>

#include "edgechain/bytes.hpp"

namespace edgechain::crypto {

namespace detail {
inline void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) throw Error(Errc::invariant_violation, "libsodium failed to initialize");
    return true;
  }();
  (void)ready;
}
}  // namespace detail

struct PublicKey {
  std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> bytes{};
  auto operator<=>(const PublicKey&) const = default;
};

struct SecretKey {
  std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> bytes{};
};

struct Signature {
  std::array<std::uint8_t, crypto_sign_BYTES> bytes{};
  auto operator<=>(const Signature&) const = default;
};

struct KeyPair {
  PublicKey public_key;
  SecretKey secret_key;
};

using Seed = std::array<std::uint8_t, crypto_sign_SEEDBYTES>;

inline Digest sha256(std::span<const std::uint8_t> data) {
  detail::ensure_sodium();
  Digest out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

// Interior Merkle node: H(left || right).
inline Digest sha256_pair(const Digest& left, const Digest& right) {
  std::array<std::uint8_t, 64> buf{};
  std::copy(left.begin(), left.end(), buf.begin());
  std::copy(right.begin(), right.end(), buf.begin() + 32);
  return sha256(buf);
}

// Ed25519; the same seed always yields the same key pair.
inline KeyPair keypair_from_seed(const Seed& seed) {
  detail::ensure_sodium();
  KeyPair kp;
  crypto_sign_seed_keypair(kp.public_key.bytes.data(), kp.secret_key.bytes.data(), seed.data());
  return kp;
}

inline Signature sign(const SecretKey& sk, std::span<const std::uint8_t> message) {
  detail::ensure_sodium();
  Signature sig;
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), sk.bytes.data());
  return sig;
}

inline bool verify(const PublicKey& pk, std::span<const std::uint8_t> message, const Signature& sig) {
  detail::ensure_sodium();
  return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(), pk.bytes.data()) == 0;
}

}  // namespace edgechain::crypto
