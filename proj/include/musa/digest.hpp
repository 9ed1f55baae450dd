// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace musa {

/// Lowercase hex SHA-256 of the input.
std::string sha256_hex(std::string_view data);

/// First 16 hex characters of the SHA-256; used for transcript digests.
std::string short_digest(std::string_view data);

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view data) noexcept;

/// splitmix64 finalizer step; maps a state to a well-mixed 64-bit value.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

std::string base64_encode(std::string_view bytes);

}  // namespace musa
