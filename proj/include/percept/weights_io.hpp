#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "percept/network.hpp"

namespace percept {

// Binary weight file, little-endian:
//   "PCPT" u32 version u32 layer_count u32 input_rank u32 input_dims[rank]
//   per layer: u16 name_len, name bytes, u8 kind, kind-specific u32 fields,
//              f32 payload (weights row-major, then bias)
inline constexpr std::uint32_t kWeightFileVersion = 1;

std::vector<std::uint8_t> encode_network(const Network& net);
Network decode_network(std::span<const std::uint8_t> bytes);

Network load_network(const std::filesystem::path& path);
void save_network(const Network& net, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace percept
