#include "hypc/bitpack.hpp"

#include <string>

#include "hypc/error.hpp"

namespace hypc {

namespace {

void check_width(unsigned bit_width) {
    if (bit_width < 1 || bit_width > 32) {
        throw DomainError("bit width " + std::to_string(bit_width) + " outside [1, 32]");
    }
}

}  // namespace

std::vector<std::uint8_t> pack_bits(std::span<const std::uint32_t> values, unsigned bit_width) {
    check_width(bit_width);
    const std::uint64_t limit = std::uint64_t{1} << bit_width;
    std::vector<std::uint8_t> out;
    out.reserve(packed_size(values.size(), bit_width));

    std::uint64_t acc = 0;
    unsigned filled = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= limit) {
            throw EncodeError("value " + std::to_string(values[i]) + " at index " +
                              std::to_string(i) + " does not fit in " +
                              std::to_string(bit_width) + " bits");
        }
        acc |= static_cast<std::uint64_t>(values[i]) << filled;
        filled += bit_width;
        while (filled >= 8) {
            out.push_back(static_cast<std::uint8_t>(acc & 0xFFu));
            acc >>= 8;
            filled -= 8;
        }
    }
    if (filled > 0) {
        out.push_back(static_cast<std::uint8_t>(acc & 0xFFu));
    }
    return out;
}

std::vector<std::uint32_t> unpack_bits(std::span<const std::uint8_t> bytes, unsigned bit_width,
                                       std::size_t count) {
    check_width(bit_width);
    const std::size_t need = packed_size(count, bit_width);
    if (bytes.size() < need) {
        throw FormatError("bit-packed stream truncated: need " + std::to_string(need) +
                          " bytes, have " + std::to_string(bytes.size()));
    }
    const std::uint64_t mask = (std::uint64_t{1} << bit_width) - 1;
    std::vector<std::uint32_t> out;
    out.reserve(count);

    std::uint64_t acc = 0;
    unsigned filled = 0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < count; ++i) {
        while (filled < bit_width) {
            acc |= static_cast<std::uint64_t>(bytes[pos++]) << filled;
            filled += 8;
        }
        out.push_back(static_cast<std::uint32_t>(acc & mask));
        acc >>= bit_width;
        filled -= bit_width;
    }
    return out;
}

}  // namespace hypc
