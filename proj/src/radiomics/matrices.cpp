#include "radsynth/radiomics/matrices.hpp"

#include <algorithm>
#include <map>

namespace radsynth {

Eigen::MatrixXd GrayLevelMatrix::normalized() const {
  if (total == 0) return Eigen::MatrixXd::Zero(counts.rows(), counts.cols());
  return counts.cast<double>() / static_cast<double>(total);
}

namespace {

Index offset_of(const DiscretizedRoi& roi, const std::array<int, 3>& d) {
  return roi.linear_offset(Eigen::Array3i(d[0], d[1], d[2]));
}

// Compresses a (level, value) -> count map into a dense matrix whose columns
// are the distinct observed values.
GrayLevelMatrix compress(MatrixKind kind, const std::array<int, 3>& direction, int gray_levels,
                         const std::vector<std::vector<std::int64_t>>& by_value) {
  GrayLevelMatrix out;
  out.kind = kind;
  out.direction = direction;
  std::vector<int> values;
  for (std::size_t value = 1; value < by_value.size(); ++value) {
    if (!by_value[value].empty()) values.push_back(static_cast<int>(value));
  }
  out.column_values = values;
  out.counts = CountMatrix::Zero(gray_levels, static_cast<Index>(values.size()));
  for (std::size_t c = 0; c < values.size(); ++c) {
    const auto& column = by_value[values[c]];
    for (int level = 0; level < gray_levels; ++level) {
      out.counts(level, static_cast<Index>(c)) = column[level];
    }
  }
  out.total = out.counts.sum();
  return out;
}

}  // namespace

std::vector<GrayLevelMatrix> glcm_matrices(const DiscretizedRoi& roi) {
  const int ng = roi.gray_levels;
  const auto& levels = roi.levels;
  const Index n = levels.size();
  std::vector<GrayLevelMatrix> out;
  out.reserve(kDirections.size());
  for (const auto& d : kDirections) {
    const Index off = offset_of(roi, d);
    CountMatrix counts = CountMatrix::Zero(ng, ng);
    // Padding guarantees i + off stays inside the grid for every in-mask i.
    for (Index i = 0; i < n; ++i) {
      const int a = levels[i];
      if (a == 0) continue;
      const int b = levels[i + off];
      if (b == 0) continue;
      ++counts(a - 1, b - 1);
      ++counts(b - 1, a - 1);
    }
    GrayLevelMatrix m;
    m.kind = MatrixKind::Glcm;
    m.direction = d;
    m.total = counts.sum();
    m.counts = std::move(counts);
    out.push_back(std::move(m));
  }
  return out;
}

GrayLevelMatrix glszm_matrix(const DiscretizedRoi& roi) {
  const int ng = roi.gray_levels;
  const auto& levels = roi.levels;
  const Index n = levels.size();

  std::vector<Index> neighbors;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx || dy || dz) neighbors.push_back(roi.linear_offset(Eigen::Array3i(dx, dy, dz)));
      }
    }
  }

  std::vector<std::uint8_t> visited(static_cast<std::size_t>(n), 0);
  std::vector<Index> stack;
  std::map<int, std::vector<std::int64_t>> zones;  // size -> counts per level
  int max_size = 0;
  for (Index seed = 0; seed < n; ++seed) {
    const int level = levels[seed];
    if (level == 0 || visited[seed]) continue;
    int size = 0;
    visited[seed] = 1;
    stack.push_back(seed);
    while (!stack.empty()) {
      const Index i = stack.back();
      stack.pop_back();
      ++size;
      for (Index off : neighbors) {
        const Index j = i + off;
        if (!visited[j] && levels[j] == level) {
          visited[j] = 1;
          stack.push_back(j);
        }
      }
    }
    auto& column = zones[size];
    if (column.empty()) column.assign(ng, 0);
    ++column[level - 1];
    max_size = std::max(max_size, size);
  }
  std::vector<std::vector<std::int64_t>> by_value(static_cast<std::size_t>(max_size) + 1);
  for (auto& [size, column] : zones) by_value[size] = std::move(column);
  return compress(MatrixKind::Glszm, {0, 0, 0}, ng, by_value);
}

std::vector<GrayLevelMatrix> glrlm_matrices(const DiscretizedRoi& roi) {
  const int ng = roi.gray_levels;
  const auto& levels = roi.levels;
  const Index n = levels.size();
  const int longest = roi.dims.maxCoeff();
  std::vector<GrayLevelMatrix> out;
  out.reserve(kDirections.size());
  for (const auto& d : kDirections) {
    const Index off = offset_of(roi, d);
    std::vector<std::vector<std::int64_t>> by_length(static_cast<std::size_t>(longest) + 1);
    for (Index i = 0; i < n; ++i) {
      const int level = levels[i];
      if (level == 0 || levels[i - off] == level) continue;  // not a run start
      int length = 1;
      for (Index j = i + off; levels[j] == level; j += off) ++length;
      auto& column = by_length[length];
      if (column.empty()) column.assign(ng, 0);
      ++column[level - 1];
    }
    out.push_back(compress(MatrixKind::Glrlm, d, ng, by_length));
  }
  return out;
}

}  // namespace radsynth
