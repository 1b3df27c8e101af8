#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "radsynth/volume.hpp"

namespace radsynth {

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;  // mm
  std::vector<std::array<int, 3>> triangles;

  double volume() const;        // signed, divergence theorem; > 0 for outward winding
  double surface_area() const;
  /// True when every undirected edge is used by exactly two triangles, once
  /// in each direction.
  bool is_closed_manifold() const;
};

/// Marching-cubes isosurface at 0.5 of the binary mask, with one voxel of
/// zero padding so the surface is always closed. Vertex coordinates are in
/// mm relative to the center of voxel (0, 0, 0). Throws EmptyMask.
TriangleMesh mesh_from_mask(const BinaryMask& m);

/// Enclosed volume and area of the same surface without materializing the
/// mesh.
struct MeshMeasures {
  double volume = 0.0;
  double area = 0.0;
};
MeshMeasures mesh_measures(const BinaryMask& m);

namespace marching_cubes {

/// Triangles for a cube configuration; entries are cube edge ids 0..11.
/// Corner c sits at (c & 1, (c >> 1) & 1, (c >> 2) & 1); bit c of the case
/// index is set when that corner is foreground.
const std::vector<std::array<int, 3>>& case_triangles(int case_index);

/// Corner pair of each cube edge.
const std::array<std::array<int, 2>, 12>& edge_corners();

}  // namespace marching_cubes

}  // namespace radsynth
