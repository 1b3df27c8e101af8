#pragma once

#include <variant>
#include <vector>

#include "radsynth/volume.hpp"

namespace radsynth {

/// Equal-count bins over [min, max] of the masked intensities.
struct FixedBinCount {
  int bins = 32;
};

/// Bins of fixed intensity width anchored at the masked minimum.
struct FixedBinWidth {
  double width = 25.0;
};

using DiscretizationRule = std::variant<FixedBinCount, FixedBinWidth>;

/// Gray-level image of a region of interest, cropped to the mask bounding
/// box and padded by one voxel of background on every side. Level 0 marks
/// voxels outside the mask; in-mask voxels carry levels 1..gray_levels.
struct DiscretizedRoi {
  using LevelGrid = Eigen::Array<std::int32_t, Eigen::Dynamic, 1>;

  Dims dims;              // padded dims = bounding-box extent + 2
  Eigen::Array3i origin;  // source index of padded voxel (1, 1, 1)
  Spacing spacing;
  LevelGrid levels;
  int gray_levels = 1;
  std::vector<double> bin_edges;
  Index voxel_count = 0;
  std::vector<double> intensities;  // raw in-mask values, x-fastest order

  Index index(int x, int y, int z) const {
    return x + static_cast<Index>(dims[0]) * (y + static_cast<Index>(dims[1]) * z);
  }
  Index linear_offset(const Eigen::Array3i& d) const { return index(d[0], d[1], d[2]); }
};

DiscretizedRoi discretize(const VoxelVolume& v, const BinaryMask& m,
                          const DiscretizationRule& rule = FixedBinCount{});

}  // namespace radsynth
