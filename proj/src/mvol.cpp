#include "radsynth/mvol.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace radsynth {

static_assert(std::endian::native == std::endian::little,
              "MVOL encoding assumes a little-endian host");

namespace {

constexpr std::uint8_t kTypeVolume = 0;
constexpr std::uint8_t kTypeMask = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

template <typename Scalar>
std::vector<std::uint8_t> encode(const Grid<Scalar>& g, std::uint8_t type) {
  std::vector<std::uint8_t> out;
  out.reserve(kMvolMagicSize + kMvolHeaderSize + sizeof(Scalar) * g.voxel_count());
  out.insert(out.end(), kMvolMagic, kMvolMagic + kMvolMagicSize);
  put(out, type);
  for (int a = 0; a < 3; ++a) put(out, static_cast<std::uint32_t>(g.dims()[a]));
  for (int a = 0; a < 3; ++a) put(out, static_cast<float>(g.spacing()[a]));
  const auto* p = reinterpret_cast<const std::uint8_t*>(g.data().data());
  out.insert(out.end(), p, p + sizeof(Scalar) * g.voxel_count());
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_mvol(const VoxelVolume& v) { return encode(v, kTypeVolume); }
std::vector<std::uint8_t> encode_mvol(const BinaryMask& m) { return encode(m, kTypeMask); }

MvolContent decode_mvol(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMvolMagicSize || std::memcmp(bytes.data(), kMvolMagic, kMvolMagicSize) != 0) {
    throw Error(ErrorCode::BadMagic, "missing MVOL1 magic");
  }
  if (bytes.size() < kMvolMagicSize + kMvolHeaderSize) {
    throw Error(ErrorCode::TruncatedPayload, "MVOL header is truncated");
  }
  std::size_t offset = kMvolMagicSize;
  const auto type = get<std::uint8_t>(bytes, offset);
  offset += 1;
  Dims dims;
  std::uint64_t count = 1;
  for (int a = 0; a < 3; ++a, offset += 4) {
    const auto n = get<std::uint32_t>(bytes, offset);
    if (n == 0 || n > static_cast<std::uint32_t>(INT32_MAX)) {
      throw Error(ErrorCode::NonPositiveDim, "MVOL dimension must be positive");
    }
    dims[a] = static_cast<int>(n);
    count *= n;
  }
  Spacing spacing;
  for (int a = 0; a < 3; ++a, offset += 4) spacing[a] = get<float>(bytes, offset);
  if (type != kTypeVolume && type != kTypeMask) {
    throw Error(ErrorCode::BadParams, "unknown MVOL payload type code");
  }
  const std::uint64_t element = type == kTypeVolume ? 4 : 1;
  const std::uint64_t available = bytes.size() - offset;
  if (count > available / element || available != count * element) {
    throw Error(ErrorCode::TruncatedPayload, "MVOL payload size does not match header dims");
  }
  if (type == kTypeVolume) {
    VoxelVolume::Storage data(static_cast<Index>(count));
    std::memcpy(data.data(), bytes.data() + offset, count * 4);
    return VoxelVolume(dims, spacing, std::move(data));
  }
  BinaryMask::Storage data(static_cast<Index>(count));
  std::memcpy(data.data(), bytes.data() + offset, count);
  return BinaryMask(dims, spacing, std::move(data));
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path);
}

MvolContent read_mvol(const std::string& path) { return decode_mvol(read_file_bytes(path)); }

void write_mvol(const VoxelVolume& v, const std::string& path) {
  write_file_bytes(path, encode_mvol(v));
}
void write_mvol(const BinaryMask& m, const std::string& path) {
  write_file_bytes(path, encode_mvol(m));
}

VoxelVolume read_volume(const std::string& path) {
  auto content = read_mvol(path);
  if (auto* v = std::get_if<VoxelVolume>(&content)) return std::move(*v);
  throw Error(ErrorCode::BadParams, path + " holds a mask, expected a float volume");
}

BinaryMask read_mask(const std::string& path) {
  auto content = read_mvol(path);
  if (auto* m = std::get_if<BinaryMask>(&content)) return std::move(*m);
  // A float volume is accepted as a mask when every voxel is 0 or 1.
  const auto& v = std::get<VoxelVolume>(content);
  if (!((v.data() == 0.0f) || (v.data() == 1.0f)).all()) {
    throw Error(ErrorCode::BadParams, path + " is not a binary mask");
  }
  return BinaryMask(v.dims(), v.spacing(), v.data().cast<std::uint8_t>());
}

}  // namespace radsynth
