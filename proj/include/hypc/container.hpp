#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hypc/codec.hpp"

namespace hypc {

struct Tensor {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::vector<float> data;

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Named f32 tensors in file order.
struct TensorBundle {
    std::vector<Tensor> tensors;

    /// Throws DataError on empty/duplicate names or shape/data mismatch.
    void validate() const;
    const Tensor* find(std::string_view name) const;
    std::uint64_t element_count() const;

    friend bool operator==(const TensorBundle&, const TensorBundle&) = default;
};

struct CompressedModel {
    static constexpr std::uint16_t kVersion = 1;

    std::uint16_t version = kVersion;
    std::vector<EncodedLayer> layers;

    void validate() const;
    const EncodedLayer* find(std::string_view name) const;

    friend bool operator==(const CompressedModel&, const CompressedModel&) = default;
};

// NTB layout (all integers little-endian):
//   "NTB1" | u32 count | per tensor: u16 name_len, name, u8 rank, u64 dims[rank],
//   u8 dtype (0 = f32), f32 data[prod(dims)]
std::vector<std::uint8_t> serialize_ntb(const TensorBundle& bundle);
TensorBundle parse_ntb(std::span<const std::uint8_t> bytes);

// HCMP layout (all integers little-endian):
//   "HCMP" | u16 version | u32 count | per layer:
//   u16 name_len, name, u8 rank, u64 dims[rank], u64 element_count, u8 padded,
//   f64 l, u32 U, u16 M, u8 direction, f64 cx, f64 cy, f64 l_f, f64 pad_value,
//   u8 bit_width, u64 payload_len, payload
std::vector<std::uint8_t> serialize_hcmp(const CompressedModel& model);
CompressedModel parse_hcmp(std::span<const std::uint8_t> bytes);

void write_ntb(const std::filesystem::path& path, const TensorBundle& bundle);
TensorBundle read_ntb(const std::filesystem::path& path);
void write_hcmp(const std::filesystem::path& path, const CompressedModel& model);
CompressedModel read_hcmp(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so a failed
/// write never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace hypc
