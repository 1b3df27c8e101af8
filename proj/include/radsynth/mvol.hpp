#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "radsynth/volume.hpp"

namespace radsynth {

// MVOL layout (little-endian):
//   "MVOL1\n" | u8 type (0 float volume, 1 byte mask) | u32 nx, ny, nz |
//   f32 sx, sy, sz | payload, x-fastest (f32 per voxel or u8 per voxel)
inline constexpr char kMvolMagic[] = "MVOL1\n";
inline constexpr std::size_t kMvolMagicSize = 6;
inline constexpr std::size_t kMvolHeaderSize = 1 + 3 * 4 + 3 * 4;

using MvolContent = std::variant<VoxelVolume, BinaryMask>;

std::vector<std::uint8_t> encode_mvol(const VoxelVolume& v);
std::vector<std::uint8_t> encode_mvol(const BinaryMask& m);
MvolContent decode_mvol(const std::vector<std::uint8_t>& bytes);

MvolContent read_mvol(const std::string& path);
void write_mvol(const VoxelVolume& v, const std::string& path);
void write_mvol(const BinaryMask& m, const std::string& path);

VoxelVolume read_volume(const std::string& path);
BinaryMask read_mask(const std::string& path);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace radsynth
