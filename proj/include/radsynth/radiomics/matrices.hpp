#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "radsynth/radiomics/roi.hpp"

namespace radsynth {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// The 13 unique offsets at Chebyshev distance 1, in extraction order.
inline constexpr std::array<std::array<int, 3>, 13> kDirections{{
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
    {1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1},
    {1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1},
}};

enum class MatrixKind { Glcm, Glszm, Glrlm };

/// Dense count matrix. Rows are gray levels 1..Ng. For GLCM the columns
/// are gray levels too; for GLSZM/GLRLM `column_values` holds the zone size
/// or run length of each column (ascending, only observed values).
struct GrayLevelMatrix {
  MatrixKind kind = MatrixKind::Glcm;
  std::array<int, 3> direction{0, 0, 0};
  CountMatrix counts;
  std::vector<int> column_values;
  std::int64_t total = 0;

  bool empty() const { return total == 0; }
  Eigen::MatrixXd normalized() const;
  int column_value(Index col) const {
    return column_values.empty() ? static_cast<int>(col) + 1 : column_values[col];
  }
};

/// Symmetric co-occurrence counts for each of the 13 directions. A direction
/// with no in-mask neighbor pairs yields an all-zero matrix.
std::vector<GrayLevelMatrix> glcm_matrices(const DiscretizedRoi& roi);

/// Size-zone matrix over 26-connected equal-level zones.
GrayLevelMatrix glszm_matrix(const DiscretizedRoi& roi);

/// Run-length matrix of maximal same-level runs along each direction.
std::vector<GrayLevelMatrix> glrlm_matrices(const DiscretizedRoi& roi);

}  // namespace radsynth
