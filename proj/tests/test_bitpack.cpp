#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hypc/bitpack.hpp"
#include "hypc/error.hpp"

using namespace hypc;

TEST(PackBits, LayoutIsLsbFirst) {
    const std::vector<std::uint32_t> v{1, 2, 3};
    const auto bytes = pack_bits(v, 2);
    ASSERT_EQ(bytes.size(), 1u);
    EXPECT_EQ(bytes[0], 0x39);
}

TEST(PackBits, CrossesByteBoundaries) {
    // 0x3FF, 0x001 at 10 bits: bits 0..9 set, bit 10 set.
    const std::vector<std::uint32_t> v{0x3FF, 0x001};
    const auto bytes = pack_bits(v, 10);
    ASSERT_EQ(bytes.size(), 3u);
    EXPECT_EQ(bytes[0], 0xFF);
    EXPECT_EQ(bytes[1], 0x07);
    EXPECT_EQ(bytes[2], 0x00);
}

TEST(PackBits, EmptyInput) {
    for (unsigned w = 1; w <= 32; ++w) {
        EXPECT_TRUE(pack_bits({}, w).empty());
        EXPECT_TRUE(unpack_bits({}, w, 0).empty());
    }
}

TEST(PackBits, RoundTripAllWidths) {
    std::mt19937_64 gen(1234);
    for (unsigned w = 1; w <= 32; ++w) {
        const std::size_t n = w <= 17 ? 100000 : 5000;
        std::vector<std::uint32_t> v(n);
        const std::uint64_t limit = std::uint64_t{1} << w;
        for (auto& x : v) x = static_cast<std::uint32_t>(gen() % limit);
        const auto bytes = pack_bits(v, w);
        EXPECT_EQ(bytes.size(), packed_size(n, w));
        EXPECT_EQ(unpack_bits(bytes, w, n), v) << "width " << w;
    }
}

TEST(PackBits, OverflowIsAnEncodeError) {
    const std::vector<std::uint32_t> v{0, 4};
    EXPECT_THROW(pack_bits(v, 2), EncodeError);
}

TEST(PackBits, InvalidWidth) {
    const std::vector<std::uint32_t> v{0};
    EXPECT_THROW(pack_bits(v, 0), DomainError);
    EXPECT_THROW(pack_bits(v, 33), DomainError);
}

TEST(UnpackBits, TruncatedInputIsAFormatError) {
    const std::vector<std::uint32_t> v(10, 5);
    auto bytes = pack_bits(v, 3);
    bytes.pop_back();
    EXPECT_THROW(unpack_bits(bytes, 3, 10), FormatError);
}
