#pragma once

// Naive enumeration oracles for the texture matrices. They work directly on
// (volume, mask) with their own discretization and never touch the padded
// level grid used by the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

#include "radsynth/radiomics/matrices.hpp"
#include "radsynth/volume.hpp"

namespace radsynth::testing {

struct OracleVoxel {
  int x, y, z, level;
};

inline std::vector<OracleVoxel> oracle_levels(const VoxelVolume& v, const BinaryMask& m, int bins) {
  double lo = 1e300, hi = -1e300;
  for (Index i = 0; i < v.voxel_count(); ++i) {
    if (!m[i]) continue;
    lo = std::min(lo, static_cast<double>(v[i]));
    hi = std::max(hi, static_cast<double>(v[i]));
  }
  std::vector<OracleVoxel> out;
  for (int z = 0; z < v.dims()[2]; ++z)
    for (int y = 0; y < v.dims()[1]; ++y)
      for (int x = 0; x < v.dims()[0]; ++x) {
        if (!m(x, y, z)) continue;
        int level = 1;
        if (hi > lo) {
          level = static_cast<int>(std::floor((v(x, y, z) - lo) / (hi - lo) * bins)) + 1;
          level = std::min(level, bins);
        }
        out.push_back({x, y, z, level});
      }
  return out;
}

using PairCounts = std::map<std::pair<int, int>, std::int64_t>;

/// Ordered pairs (p, q) with q - p = +d or -d, counted over all voxel pairs.
inline PairCounts glcm_oracle(const std::vector<OracleVoxel>& voxels, const std::array<int, 3>& d) {
  PairCounts counts;
  for (const auto& p : voxels) {
    for (const auto& q : voxels) {
      const int dx = q.x - p.x, dy = q.y - p.y, dz = q.z - p.z;
      const bool forward = dx == d[0] && dy == d[1] && dz == d[2];
      const bool backward = dx == -d[0] && dy == -d[1] && dz == -d[2];
      if (forward || backward) ++counts[{p.level, q.level}];
    }
  }
  return counts;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

/// (level, component size) counts, joining voxel pairs accepted by `linked`.
template <typename Linked>
PairCounts component_oracle(const std::vector<OracleVoxel>& voxels, Linked linked) {
  UnionFind uf(voxels.size());
  for (std::size_t i = 0; i < voxels.size(); ++i)
    for (std::size_t j = i + 1; j < voxels.size(); ++j)
      if (voxels[i].level == voxels[j].level && linked(voxels[i], voxels[j])) {
        uf.join(static_cast<int>(i), static_cast<int>(j));
      }
  std::map<int, int> sizes;
  for (std::size_t i = 0; i < voxels.size(); ++i) ++sizes[uf.find(static_cast<int>(i))];
  PairCounts counts;
  for (const auto& [root, size] : sizes) ++counts[{voxels[root].level, size}];
  return counts;
}

inline PairCounts glszm_oracle(const std::vector<OracleVoxel>& voxels) {
  return component_oracle(voxels, [](const OracleVoxel& a, const OracleVoxel& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)}) == 1;
  });
}

inline PairCounts glrlm_oracle(const std::vector<OracleVoxel>& voxels, const std::array<int, 3>& d) {
  return component_oracle(voxels, [&](const OracleVoxel& a, const OracleVoxel& b) {
    const int dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
    return (dx == d[0] && dy == d[1] && dz == d[2]) || (dx == -d[0] && dy == -d[1] && dz == -d[2]);
  });
}

/// Nonzero entries of a library matrix keyed like the oracles.
inline PairCounts as_pair_counts(const GrayLevelMatrix& m) {
  PairCounts out;
  for (Index c = 0; c < m.counts.cols(); ++c)
    for (Index r = 0; r < m.counts.rows(); ++r)
      if (m.counts(r, c) != 0) out[{static_cast<int>(r) + 1, m.column_value(c)}] = m.counts(r, c);
  return out;
}

}  // namespace radsynth::testing
