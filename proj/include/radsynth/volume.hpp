#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "radsynth/error.hpp"

namespace radsynth {

using Index = Eigen::Index;
using Dims = Eigen::Array3i;
using Spacing = Eigen::Vector3d;

/// Dense 3D grid with physical spacing (mm). Data is stored x-fastest:
/// index = x + nx * (y + ny * z). Immutable after construction.
template <typename Scalar>
class Grid {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Grid(const Dims& dims, const Spacing& spacing, Storage data)
      : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    validate();
  }

  Grid(const Dims& dims, const Spacing& spacing, Scalar fill)
      : dims_(dims), spacing_(spacing) {
    check_geometry();
    data_ = Storage::Constant(voxel_count(), fill);
    validate();
  }

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  const Storage& data() const { return data_; }
  Index voxel_count() const {
    return static_cast<Index>(dims_[0]) * dims_[1] * dims_[2];
  }

  Index index(int x, int y, int z) const {
    return x + static_cast<Index>(dims_[0]) * (y + static_cast<Index>(dims_[1]) * z);
  }
  Scalar operator()(int x, int y, int z) const { return data_[index(x, y, z)]; }
  Scalar operator[](Index i) const { return data_[i]; }

  bool contains(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims_[0] && y < dims_[1] && z < dims_[2];
  }

  bool same_geometry(const Grid& other) const { return same_geometry_as(other); }
  template <typename Other>
  bool same_geometry_as(const Other& other) const {
    return (dims_ == other.dims()).all() && spacing_ == other.spacing();
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.same_geometry(b) && (a.data_ == b.data_).all();
  }

 private:
  void check_geometry() const {
    if ((dims_ <= 0).any()) {
      throw Error(ErrorCode::NonPositiveDim, "grid dimensions must be positive");
    }
    if (!(spacing_.array() > 0.0).all() || !spacing_.allFinite()) {
      throw Error(ErrorCode::BadParams, "voxel spacing must be positive and finite");
    }
  }

  void validate() {
    check_geometry();
    if (data_.size() != voxel_count()) {
      throw Error(ErrorCode::DimMismatch, "data length does not match dims");
    }
    if constexpr (std::is_floating_point_v<Scalar>) {
      if (!data_.allFinite()) {
        throw Error(ErrorCode::NonFiniteVoxel, "volume contains NaN or Inf");
      }
    } else {
      data_ = (data_ != Scalar(0)).template cast<Scalar>();
    }
  }

  Dims dims_;
  Spacing spacing_;
  Storage data_;
};

/// Scalar intensity volume with 32-bit float voxels.
using VoxelVolume = Grid<float>;
/// One byte per voxel, values normalized to {0, 1}.
using BinaryMask = Grid<std::uint8_t>;

/// Inclusive voxel-index box.
struct BoundingBox {
  Eigen::Array3i min;
  Eigen::Array3i max;

  Eigen::Array3i extent() const { return max - min + 1; }
};

struct SliceImage {
  int width = 0;
  int height = 0;
  double window_lo = 0.0;
  double window_hi = 1.0;
  std::vector<std::uint8_t> pixels;  // row-major, width fastest
};

enum class MaskMode { ZeroInside, ZeroOutside };
enum class Axis { X, Y, Z };

Axis parse_axis(const std::string& name);

Index foreground_count(const BinaryMask& m);

/// Bounding box of the foreground. Throws EmptyMask.
BoundingBox bounding_box(const BinaryMask& m);

/// Blanks the masked region (ZeroInside, the default for synthesis and
/// removal) or everything else (ZeroOutside).
VoxelVolume apply_mask(const VoxelVolume& v, const BinaryMask& m,
                       MaskMode mode = MaskMode::ZeroInside);

/// Uniform random translation of `m` that keeps it inside the grid and
/// disjoint from the original. Throws NoPlacementFound after `max_tries`.
BinaryMask shift_mask_nonoverlapping(const BinaryMask& m, std::uint64_t seed,
                                     int max_tries = 1000);

BinaryMask translate_mask(const BinaryMask& m, const Eigen::Array3i& offset);

std::pair<VoxelVolume, BinaryMask> crop_to_roi(const VoxelVolume& v, const BinaryMask& m,
                                               int margin_voxels);

/// Windowed 8-bit slice. Axis Z gives the axial x-y plane, X the sagittal
/// y-z plane, Y the coronal x-z plane. Values outside the window clamp.
SliceImage extract_slice(const VoxelVolume& v, Axis axis, int index, double lo, double hi);

SliceImage mask_slice(const BinaryMask& m, Axis axis, int index);

std::vector<std::uint8_t> encode_png(const SliceImage& image);
void write_png(const SliceImage& image, const std::string& path);

VoxelVolume mask_to_volume(const BinaryMask& m);

template <typename Scalar>
void require_same_geometry(const VoxelVolume& v, const Grid<Scalar>& other) {
  if (!v.same_geometry_as(other)) {
    throw Error(ErrorCode::DimMismatch, "volume and mask geometry differ");
  }
}

}  // namespace radsynth
