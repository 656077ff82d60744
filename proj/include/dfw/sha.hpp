#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "dfw/common.hpp"

namespace dfw {

using Digest32 = std::array<std::uint8_t, 32>;

Digest32 sha256(std::span<const std::uint8_t> data);
Digest32 hmac_sha256(std::span<const std::uint8_t> key,
                     std::span<const std::uint8_t> msg);

// Incremental SHA-256, used for trailing-checksum file formats.
class Sha256Stream {
 public:
  Sha256Stream();
  ~Sha256Stream();
  Sha256Stream(const Sha256Stream&) = delete;
  Sha256Stream& operator=(const Sha256Stream&) = delete;

  void update(std::span<const std::uint8_t> data);
  Digest32 finish();

 private:
  void* ctx_;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> data,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::span<const std::uint8_t> data);
ByteVec from_hex(const std::string& hex);

// number of leading zero bits of a digest, MSB of byte 0 first
int leading_zero_bits(const Digest32& d);

}  // namespace dfw
