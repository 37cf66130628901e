#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hypc {

/// Number of bytes needed for `count` values of `bit_width` bits.
constexpr std::size_t packed_size(std::size_t count, unsigned bit_width) noexcept {
    return (count * bit_width + 7) / 8;
}

/// Packs values LSB-first, back to back, zero-padding the final byte.
/// Requires 1 <= bit_width <= 32 and every value < 2^bit_width (EncodeError).
std::vector<std::uint8_t> pack_bits(std::span<const std::uint32_t> values, unsigned bit_width);

/// Inverse of pack_bits. Throws FormatError when `bytes` is too short.
std::vector<std::uint32_t> unpack_bits(std::span<const std::uint8_t> bytes, unsigned bit_width,
                                       std::size_t count);

}  // namespace hypc
