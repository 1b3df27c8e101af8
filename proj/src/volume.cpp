#include "radsynth/volume.hpp"

#include <algorithm>

#include "radsynth/random.hpp"

namespace radsynth {

Axis parse_axis(const std::string& name) {
  if (name == "x") return Axis::X;
  if (name == "y") return Axis::Y;
  if (name == "z") return Axis::Z;
  throw Error(ErrorCode::BadParams, "axis must be one of x, y, z");
}

Index foreground_count(const BinaryMask& m) {
  return m.data().template cast<Index>().sum();
}

BoundingBox bounding_box(const BinaryMask& m) {
  BoundingBox box{m.dims(), Eigen::Array3i::Constant(-1)};
  const Dims& d = m.dims();
  Index i = 0;
  for (int z = 0; z < d[2]; ++z) {
    for (int y = 0; y < d[1]; ++y) {
      for (int x = 0; x < d[0]; ++x, ++i) {
        if (!m[i]) continue;
        const Eigen::Array3i p(x, y, z);
        box.min = box.min.min(p);
        box.max = box.max.max(p);
      }
    }
  }
  if (box.max[0] < 0) throw Error(ErrorCode::EmptyMask, "mask has no foreground voxels");
  return box;
}

VoxelVolume apply_mask(const VoxelVolume& v, const BinaryMask& m, MaskMode mode) {
  require_same_geometry(v, m);
  const std::uint8_t blank = mode == MaskMode::ZeroInside ? 1 : 0;
  VoxelVolume::Storage out = (m.data() == blank).select(0.0f, v.data());
  return VoxelVolume(v.dims(), v.spacing(), std::move(out));
}

BinaryMask translate_mask(const BinaryMask& m, const Eigen::Array3i& offset) {
  const Dims& d = m.dims();
  BinaryMask::Storage out = BinaryMask::Storage::Zero(m.voxel_count());
  for (int z = 0; z < d[2]; ++z) {
    for (int y = 0; y < d[1]; ++y) {
      for (int x = 0; x < d[0]; ++x) {
        if (!m(x, y, z)) continue;
        const int tx = x + offset[0], ty = y + offset[1], tz = z + offset[2];
        if (!m.contains(tx, ty, tz)) {
          throw Error(ErrorCode::IndexOutOfRange, "translated mask leaves the grid");
        }
        out[m.index(tx, ty, tz)] = 1;
      }
    }
  }
  return BinaryMask(d, m.spacing(), std::move(out));
}

BinaryMask shift_mask_nonoverlapping(const BinaryMask& m, std::uint64_t seed, int max_tries) {
  const BoundingBox box = bounding_box(m);
  const Eigen::Array3i lo = -box.min;
  const Eigen::Array3i hi = m.dims() - 1 - box.max;

  std::vector<Index> foreground;
  for (Index i = 0; i < m.voxel_count(); ++i) {
    if (m[i]) foreground.push_back(i);
  }
  const Dims& d = m.dims();

  Rng rng(seed);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    const Eigen::Array3i offset(static_cast<int>(rng.uniform_int(lo[0], hi[0])),
                                static_cast<int>(rng.uniform_int(lo[1], hi[1])),
                                static_cast<int>(rng.uniform_int(lo[2], hi[2])));
    const Index linear_shift =
        offset[0] + static_cast<Index>(d[0]) * (offset[1] + static_cast<Index>(d[1]) * offset[2]);
    const bool overlaps = std::any_of(foreground.begin(), foreground.end(),
                                      [&](Index i) { return m[i + linear_shift] != 0; });
    if (!overlaps) return translate_mask(m, offset);
  }
  throw Error(ErrorCode::NoPlacementFound,
              "no non-overlapping translation found after " + std::to_string(max_tries) +
                  " proposals");
}

namespace {

template <typename Scalar>
Grid<Scalar> crop_grid(const Grid<Scalar>& g, const Eigen::Array3i& lo, const Eigen::Array3i& hi) {
  const Dims out_dims = hi - lo + 1;
  typename Grid<Scalar>::Storage out(static_cast<Index>(out_dims.prod()));
  Index i = 0;
  for (int z = lo[2]; z <= hi[2]; ++z) {
    for (int y = lo[1]; y <= hi[1]; ++y) {
      const Index row = g.index(lo[0], y, z);
      out.segment(i, out_dims[0]) = g.data().segment(row, out_dims[0]);
      i += out_dims[0];
    }
  }
  return Grid<Scalar>(out_dims, g.spacing(), std::move(out));
}

}  // namespace

std::pair<VoxelVolume, BinaryMask> crop_to_roi(const VoxelVolume& v, const BinaryMask& m,
                                               int margin_voxels) {
  require_same_geometry(v, m);
  if (margin_voxels < 0) throw Error(ErrorCode::BadParams, "margin must be non-negative");
  const BoundingBox box = bounding_box(m);
  const Eigen::Array3i lo = (box.min - margin_voxels).max(0);
  const Eigen::Array3i hi = (box.max + margin_voxels).min(v.dims() - 1);
  return {crop_grid(v, lo, hi), crop_grid(m, lo, hi)};
}

namespace {

struct PlaneLayout {
  int width;
  int height;
};

PlaneLayout plane_layout(const Dims& d, Axis axis) {
  switch (axis) {
    case Axis::X: return {d[1], d[2]};
    case Axis::Y: return {d[0], d[2]};
    case Axis::Z: return {d[0], d[1]};
  }
  return {0, 0};
}

template <typename Scalar, typename Map>
SliceImage slice_of(const Grid<Scalar>& g, Axis axis, int index, double lo, double hi, Map map) {
  const int axis_id = static_cast<int>(axis);
  if (index < 0 || index >= g.dims()[axis_id]) {
    throw Error(ErrorCode::IndexOutOfRange, "slice index outside the volume");
  }
  const PlaneLayout layout = plane_layout(g.dims(), axis);
  SliceImage image{layout.width, layout.height, lo, hi, {}};
  image.pixels.resize(static_cast<std::size_t>(layout.width) * layout.height);
  for (int row = 0; row < layout.height; ++row) {
    for (int col = 0; col < layout.width; ++col) {
      Scalar value{};
      switch (axis) {
        case Axis::X: value = g(index, col, row); break;
        case Axis::Y: value = g(col, index, row); break;
        case Axis::Z: value = g(col, row, index); break;
      }
      image.pixels[static_cast<std::size_t>(row) * layout.width + col] = map(value);
    }
  }
  return image;
}

}  // namespace

SliceImage extract_slice(const VoxelVolume& v, Axis axis, int index, double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::BadParams, "window requires finite lo < hi");
  }
  const double scale = 1.0 / (hi - lo);
  return slice_of(v, axis, index, lo, hi, [&](float value) {
    const double t = std::clamp((static_cast<double>(value) - lo) * scale, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(t * 255.0 + 0.5));
  });
}

SliceImage mask_slice(const BinaryMask& m, Axis axis, int index) {
  return slice_of(m, axis, index, 0.0, 1.0,
                  [](std::uint8_t value) { return static_cast<std::uint8_t>(value ? 255 : 0); });
}

VoxelVolume mask_to_volume(const BinaryMask& m) {
  return VoxelVolume(m.dims(), m.spacing(), m.data().cast<float>());
}

}  // namespace radsynth
