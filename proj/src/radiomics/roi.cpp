#include "radsynth/radiomics/roi.hpp"

#include <algorithm>
#include <cmath>

namespace radsynth {

DiscretizedRoi discretize(const VoxelVolume& v, const BinaryMask& m,
                          const DiscretizationRule& rule) {
  require_same_geometry(v, m);
  if (const auto* count = std::get_if<FixedBinCount>(&rule); count && count->bins < 2) {
    throw Error(ErrorCode::BadParams, "fixed bin count requires at least 2 bins");
  }
  if (const auto* width = std::get_if<FixedBinWidth>(&rule);
      width && !(width->width > 0.0 && std::isfinite(width->width))) {
    throw Error(ErrorCode::BadParams, "fixed bin width must be positive");
  }
  const BoundingBox box = bounding_box(m);

  DiscretizedRoi roi;
  roi.dims = box.extent() + 2;
  roi.origin = box.min;
  roi.spacing = v.spacing();
  roi.levels = DiscretizedRoi::LevelGrid::Zero(static_cast<Index>(roi.dims.prod()));

  std::vector<Index> slots;
  for (int z = box.min[2]; z <= box.max[2]; ++z) {
    for (int y = box.min[1]; y <= box.max[1]; ++y) {
      for (int x = box.min[0]; x <= box.max[0]; ++x) {
        const Index src = v.index(x, y, z);
        if (!m[src]) continue;
        roi.intensities.push_back(v[src]);
        slots.push_back(roi.index(x - box.min[0] + 1, y - box.min[1] + 1, z - box.min[2] + 1));
      }
    }
  }
  roi.voxel_count = static_cast<Index>(slots.size());

  const auto [lo_it, hi_it] = std::minmax_element(roi.intensities.begin(), roi.intensities.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  if (const auto* count = std::get_if<FixedBinCount>(&rule)) {
    if (hi == lo) {
      roi.gray_levels = 1;
      roi.bin_edges = {lo, hi};
      for (Index slot : slots) roi.levels[slot] = 1;
    } else {
      const int bins = count->bins;
      roi.gray_levels = bins;
      const double range = hi - lo;
      for (int k = 0; k <= bins; ++k) roi.bin_edges.push_back(lo + range * k / bins);
      for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto level = static_cast<int>(std::floor((roi.intensities[i] - lo) / range * bins)) + 1;
        roi.levels[slots[i]] = std::clamp(level, 1, bins);
      }
    }
  } else {
    const double width = std::get<FixedBinWidth>(rule).width;
    int max_level = 1;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const int level = static_cast<int>(std::floor((roi.intensities[i] - lo) / width)) + 1;
      roi.levels[slots[i]] = level;
      max_level = std::max(max_level, level);
    }
    roi.gray_levels = max_level;
    for (int k = 0; k <= max_level; ++k) roi.bin_edges.push_back(lo + width * k);
  }
  return roi;
}

}  // namespace radsynth
