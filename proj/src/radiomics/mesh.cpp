#include "radsynth/radiomics/mesh.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace radsynth {

namespace marching_cubes {

namespace {

constexpr std::array<std::array<int, 2>, 12> kEdges{{
    {0, 1}, {2, 3}, {4, 5}, {6, 7},  // along x
    {0, 2}, {1, 3}, {4, 6}, {5, 7},  // along y
    {0, 4}, {1, 5}, {2, 6}, {3, 7},  // along z
}};

// Faces as corner cycles, counter-clockwise seen from outside the cube.
constexpr std::array<std::array<int, 4>, 6> kFaces{{
    {0, 2, 3, 1},  // z = 0
    {4, 5, 7, 6},  // z = 1
    {0, 1, 5, 4},  // y = 0
    {2, 6, 7, 3},  // y = 1
    {0, 4, 6, 2},  // x = 0
    {1, 3, 7, 5},  // x = 1
}};

int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    if ((kEdges[e][0] == a && kEdges[e][1] == b) || (kEdges[e][0] == b && kEdges[e][1] == a)) {
      return e;
    }
  }
  return -1;
}

Eigen::Vector3d edge_midpoint(int e) {
  auto corner = [](int c) { return Eigen::Vector3d(c & 1, (c >> 1) & 1, (c >> 2) & 1); };
  return 0.5 * (corner(kEdges[e][0]) + corner(kEdges[e][1]));
}

bool share_face(int e1, int e2) {
  for (const auto& face : kFaces) {
    auto on_face = [&](int e) {
      const auto has = [&](int c) { return std::find(face.begin(), face.end(), c) != face.end(); };
      return has(kEdges[e][0]) && has(kEdges[e][1]);
    };
    if (on_face(e1) && on_face(e2)) return true;
  }
  return false;
}

// Minimum-area triangulation of a loop whose chords never lie in a cube
// face. A face chord would coincide with a chord of the neighboring cube and
// pinch the surface.
void triangulate_loop(const std::vector<int>& loop, std::vector<std::array<int, 3>>& out) {
  const int n = static_cast<int>(loop.size());
  constexpr double kForbidden = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<int>> split(n, std::vector<int>(n, -1));
  auto chord_ok = [&](int i, int j) {
    return j - i == 1 || (i == 0 && j == n - 1) || !share_face(loop[i], loop[j]);
  };
  for (int len = 2; len < n; ++len) {
    for (int i = 0; i + len < n; ++i) {
      const int j = i + len;
      cost[i][j] = kForbidden;
      if (!chord_ok(i, j)) continue;
      for (int k = i + 1; k < j; ++k) {
        const double area = (edge_midpoint(loop[k]) - edge_midpoint(loop[i]))
                                .cross(edge_midpoint(loop[j]) - edge_midpoint(loop[i]))
                                .norm();
        const double c = cost[i][k] + cost[k][j] + area;
        if (c < cost[i][j] - 1e-12) {
          cost[i][j] = c;
          split[i][j] = k;
        }
      }
    }
  }
  if (!(cost[0][n - 1] < kForbidden)) {
    throw std::logic_error("marching cubes loop without a face-free triangulation");
  }
  std::vector<std::pair<int, int>> stack{{0, n - 1}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    if (j - i < 2) continue;
    const int k = split[i][j];
    out.push_back({loop[i], loop[k], loop[j]});
    stack.emplace_back(i, k);
    stack.emplace_back(k, j);
  }
}

// Builds the triangulation of one case. On each face, every maximal run of
// consecutive foreground corners is cut off by one segment, so diagonal
// foreground corners on a face stay separated; the choice depends only on
// the face, which keeps neighboring cubes consistent. Segments chain into
// closed loops.
std::vector<std::array<int, 3>> build_case(int case_index) {
  auto inside = [&](int corner) { return (case_index >> corner) & 1; };
  std::array<int, 12> next;
  next.fill(-1);
  for (const auto& face : kFaces) {
    for (int k = 0; k < 4; ++k) {
      const int prev = face[(k + 3) % 4];
      if (!inside(face[k]) || inside(prev)) continue;  // k starts a foreground run
      int last = k;
      while (inside(face[(last + 1) % 4]) && (last + 1) % 4 != k) last = (last + 1) % 4;
      const int entry = edge_between(prev, face[k]);
      const int exit = edge_between(face[last], face[(last + 1) % 4]);
      next[entry] = exit;
    }
  }
  std::vector<std::array<int, 3>> triangles;
  std::array<bool, 12> used{};
  for (int start = 0; start < 12; ++start) {
    if (next[start] < 0 || used[start]) continue;
    std::vector<int> loop;
    for (int e = start; !used[e]; e = next[e]) {
      used[e] = true;
      loop.push_back(e);
    }
    triangulate_loop(loop, triangles);
  }
  return triangles;
}

std::array<std::vector<std::array<int, 3>>, 256> build_table() {
  std::array<std::vector<std::array<int, 3>>, 256> table;
  for (int c = 0; c < 256; ++c) table[c] = build_case(c);
  return table;
}

}  // namespace

const std::vector<std::array<int, 3>>& case_triangles(int case_index) {
  static const auto table = build_table();
  return table[case_index];
}

const std::array<std::array<int, 2>, 12>& edge_corners() { return kEdges; }

}  // namespace marching_cubes

double TriangleMesh::volume() const {
  double six_v = 0.0;
  for (const auto& t : triangles) {
    six_v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]]));
  }
  return six_v / 6.0;
}

double TriangleMesh::surface_area() const {
  double twice_a = 0.0;
  for (const auto& t : triangles) {
    twice_a += (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
  }
  return twice_a / 2.0;
}

bool TriangleMesh::is_closed_manifold() const {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      if (++directed[{t[k], t[(k + 1) % 3]}] > 1) return false;
    }
  }
  for (const auto& [edge, count] : directed) {
    if (!directed.contains({edge.second, edge.first})) return false;
  }
  return !triangles.empty();
}

namespace {

// Visits every non-trivial cube of the padded mask. The callback receives
// the cube's min corner (in padded voxel coordinates) and its case index.
template <typename Visit>
void for_each_surface_cube(const BinaryMask& m, Visit&& visit) {
  const BoundingBox box = bounding_box(m);
  const Dims& d = m.dims();
  auto at = [&](int x, int y, int z) -> int {
    return (x >= 0 && y >= 0 && z >= 0 && x < d[0] && y < d[1] && z < d[2]) ? m(x, y, z) : 0;
  };
  // Cube (x, y, z) spans voxels x..x+1 etc; cubes from box.min-1 to box.max.
  for (int z = box.min[2] - 1; z <= box.max[2]; ++z) {
    for (int y = box.min[1] - 1; y <= box.max[1]; ++y) {
      for (int x = box.min[0] - 1; x <= box.max[0]; ++x) {
        int case_index = 0;
        for (int c = 0; c < 8; ++c) {
          if (at(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1))) case_index |= 1 << c;
        }
        if (case_index != 0 && case_index != 255) visit(x, y, z, case_index);
      }
    }
  }
}

Eigen::Vector3d edge_midpoint(int x, int y, int z, int edge, const Spacing& spacing) {
  const auto& corners = marching_cubes::edge_corners()[edge];
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  for (int c : corners) {
    p += Eigen::Vector3d(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1));
  }
  return (0.5 * p).cwiseProduct(spacing);
}

}  // namespace

TriangleMesh mesh_from_mask(const BinaryMask& m) {
  TriangleMesh mesh;
  // Vertex key: lower corner of the edge (shifted by +1 to be non-negative)
  // and the edge axis.
  std::map<std::array<int, 4>, int> vertex_ids;
  const auto& edges = marching_cubes::edge_corners();
  for_each_surface_cube(m, [&](int x, int y, int z, int case_index) {
    for (const auto& tri : marching_cubes::case_triangles(case_index)) {
      std::array<int, 3> ids;
      for (int k = 0; k < 3; ++k) {
        const int c = edges[tri[k]][0];
        const std::array<int, 4> key{x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1),
                                     tri[k] / 4};
        auto [it, inserted] = vertex_ids.try_emplace(key, static_cast<int>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back(edge_midpoint(x, y, z, tri[k], m.spacing()));
        ids[k] = it->second;
      }
      mesh.triangles.push_back(ids);
    }
  });
  return mesh;
}

MeshMeasures mesh_measures(const BinaryMask& m) {
  MeshMeasures out;
  // Per-case volume and area contributions are translation dependent for the
  // volume term, so accumulate triangle by triangle relative to the cube.
  struct CaseMeasure {
    double area = 0.0;
    Eigen::Vector3d normal_sum = Eigen::Vector3d::Zero();  // sum of area-weighted normals
    double local_six_v = 0.0;
  };
  const Spacing& s = m.spacing();
  std::array<CaseMeasure, 256> cache;
  std::array<bool, 256> ready{};
  for_each_surface_cube(m, [&](int x, int y, int z, int case_index) {
    if (!ready[case_index]) {
      CaseMeasure cm;
      for (const auto& tri : marching_cubes::case_triangles(case_index)) {
        const Eigen::Vector3d a = edge_midpoint(0, 0, 0, tri[0], s);
        const Eigen::Vector3d b = edge_midpoint(0, 0, 0, tri[1], s);
        const Eigen::Vector3d c = edge_midpoint(0, 0, 0, tri[2], s);
        const Eigen::Vector3d n = (b - a).cross(c - a);
        cm.area += 0.5 * n.norm();
        cm.normal_sum += n;
        cm.local_six_v += a.dot(b.cross(c));
      }
      cache[case_index] = cm;
      ready[case_index] = true;
    }
    const CaseMeasure& cm = cache[case_index];
    // Translating a triangle by t adds t . (b - a) x (c - a) to 6V.
    const Eigen::Vector3d origin = Eigen::Vector3d(x, y, z).cwiseProduct(s);
    out.volume += (cm.local_six_v + origin.dot(cm.normal_sum)) / 6.0;
    out.area += cm.area;
  });
  return out;
}

}  // namespace radsynth
