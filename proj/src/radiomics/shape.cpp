#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "radsynth/radiomics/features.hpp"

namespace radsynth {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Vector3d physical(int x, int y, int z, const Spacing& s) {
  return Eigen::Vector3d(x * s[0], y * s[1], z * s[2]);
}

// Largest pairwise distance. Points are visited by decreasing distance from
// their centroid so that |p - c| + |q - c| bounds the remaining pairs.
double max_pairwise_distance(std::vector<Eigen::Vector3d> points) {
  if (points.size() < 2) return 0.0;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  std::vector<std::pair<double, Eigen::Vector3d>> ranked;
  ranked.reserve(points.size());
  for (const auto& p : points) ranked.emplace_back((p - centroid).norm(), p);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double best_sq = 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < ranked.size(); ++i) {
    if (ranked[i].first + ranked[i + 1].first <= best) break;
    for (std::size_t j = i + 1; j < ranked.size(); ++j) {
      if (ranked[i].first + ranked[j].first <= best) break;
      const double d2 = (ranked[i].second - ranked[j].second).squaredNorm();
      if (d2 > best_sq) {
        best_sq = d2;
        best = std::sqrt(d2);
      }
    }
  }
  return best;
}

// Per-line extremes of the foreground along each axis. A point strictly
// inside the foreground span of any axis-parallel line through it cannot be
// a convex-hull vertex, so only line extremes can realize a diameter.
struct LineExtremes {
  const BinaryMask& m;
  Eigen::ArrayXi lo[3], hi[3];

  explicit LineExtremes(const BinaryMask& mask) : m(mask) {
    const Dims& d = m.dims();
    for (int a = 0; a < 3; ++a) {
      const int u = (a + 1) % 3, v = (a + 2) % 3;
      lo[a] = Eigen::ArrayXi::Constant(static_cast<Index>(d[u]) * d[v], INT32_MAX);
      hi[a] = Eigen::ArrayXi::Constant(static_cast<Index>(d[u]) * d[v], -1);
    }
    for (int z = 0; z < d[2]; ++z) {
      for (int y = 0; y < d[1]; ++y) {
        for (int x = 0; x < d[0]; ++x) {
          if (!m(x, y, z)) continue;
          const std::array<int, 3> p{x, y, z};
          for (int a = 0; a < 3; ++a) {
            const Index key = line(a, p);
            lo[a][key] = std::min(lo[a][key], p[a]);
            hi[a][key] = std::max(hi[a][key], p[a]);
          }
        }
      }
    }
  }

  Index line(int axis, const std::array<int, 3>& p) const {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    return p[u] + static_cast<Index>(m.dims()[u]) * p[v];
  }

  bool extreme(int axis, const std::array<int, 3>& p) const {
    const Index key = line(axis, p);
    return p[axis] == lo[axis][key] || p[axis] == hi[axis][key];
  }
};

}  // namespace

std::vector<Eigen::Vector3d> boundary_points(const BinaryMask& m) {
  std::vector<Eigen::Vector3d> out;
  const Dims& d = m.dims();
  auto fg = [&](int x, int y, int z) { return m.contains(x, y, z) && m(x, y, z); };
  for (int z = 0; z < d[2]; ++z) {
    for (int y = 0; y < d[1]; ++y) {
      for (int x = 0; x < d[0]; ++x) {
        if (!m(x, y, z)) continue;
        if (!fg(x - 1, y, z) || !fg(x + 1, y, z) || !fg(x, y - 1, z) || !fg(x, y + 1, z) ||
            !fg(x, y, z - 1) || !fg(x, y, z + 1)) {
          out.push_back(physical(x, y, z, m.spacing()));
        }
      }
    }
  }
  return out;
}

Diameters max_diameters(const BinaryMask& m) {
  const LineExtremes ext(m);
  const Dims& d = m.dims();
  std::vector<Eigen::Vector3d> hull_candidates;
  // Plane-grouped candidates: by z (slice), by x (column), by y (row).
  std::vector<std::vector<Eigen::Vector3d>> by_z(d[2]), by_x(d[0]), by_y(d[1]);
  for (int z = 0; z < d[2]; ++z) {
    for (int y = 0; y < d[1]; ++y) {
      for (int x = 0; x < d[0]; ++x) {
        if (!m(x, y, z)) continue;
        const std::array<int, 3> p{x, y, z};
        const bool ex = ext.extreme(0, p), ey = ext.extreme(1, p), ez = ext.extreme(2, p);
        if (!(ex || ey || ez)) continue;
        const Eigen::Vector3d q = physical(x, y, z, m.spacing());
        if (ex && ey && ez) hull_candidates.push_back(q);
        if (ex && ey) by_z[z].push_back(q);
        if (ey && ez) by_x[x].push_back(q);
        if (ex && ez) by_y[y].push_back(q);
      }
    }
  }
  Diameters out;
  out.max3d = max_pairwise_distance(std::move(hull_candidates));
  for (auto& plane : by_z) out.slice = std::max(out.slice, max_pairwise_distance(std::move(plane)));
  for (auto& plane : by_x) out.column = std::max(out.column, max_pairwise_distance(std::move(plane)));
  for (auto& plane : by_y) out.row = std::max(out.row, max_pairwise_distance(std::move(plane)));
  return out;
}

ShapeAnalysis analyze_shape(const BinaryMask& m) {
  const Index n = foreground_count(m);
  if (n == 0) throw Error(ErrorCode::EmptyMask, "shape features need a non-empty mask");

  const MeshMeasures mesh = mesh_measures(m);
  const double volume = mesh.volume;
  const double area = mesh.area;
  const double sphericity = std::cbrt(36.0 * kPi * volume * volume) / area;
  const double equivalent_radius = std::cbrt(3.0 * volume / (4.0 * kPi));
  const Diameters diameters = max_diameters(m);

  ShapeAnalysis out;
  out.voxel_volume = static_cast<double>(n) * m.spacing().prod();
  double major = 0.0, minor = 0.0, least = 0.0, elongation = 0.0, flatness = 0.0;
  if (n < 2) {
    out.degenerate_axes = true;
  } else {
    const Dims& d = m.dims();
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int z = 0; z < d[2]; ++z)
      for (int y = 0; y < d[1]; ++y)
        for (int x = 0; x < d[0]; ++x)
          if (m(x, y, z)) mean += physical(x, y, z, m.spacing());
    mean /= static_cast<double>(n);
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    for (int z = 0; z < d[2]; ++z)
      for (int y = 0; y < d[1]; ++y)
        for (int x = 0; x < d[0]; ++x)
          if (m(x, y, z)) {
            const Eigen::Vector3d c = physical(x, y, z, m.spacing()) - mean;
            covariance.noalias() += c * c.transpose();
          }
    covariance /= static_cast<double>(n);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(covariance,
                                                                Eigen::EigenvaluesOnly);
    const Eigen::Vector3d lambda = solver.eigenvalues().cwiseMax(0.0);  // ascending
    major = 4.0 * std::sqrt(lambda[2]);
    minor = 4.0 * std::sqrt(lambda[1]);
    least = 4.0 * std::sqrt(lambda[0]);
    elongation = lambda[2] > 0.0 ? std::sqrt(lambda[1] / lambda[2]) : 0.0;
    flatness = lambda[2] > 0.0 ? std::sqrt(lambda[0] / lambda[2]) : 0.0;
  }

  using C = FeatureClass;
  out.features = FeatureVector({
      {C::Shape, "MeshVolume", volume},
      {C::Shape, "SurfaceArea", area},
      {C::Shape, "SurfaceVolumeRatio", area / volume},
      {C::Shape, "Sphericity", sphericity},
      {C::Shape, "Compactness1", volume / (std::sqrt(kPi) * std::pow(area, 1.5))},
      {C::Shape, "Compactness2", 36.0 * kPi * volume * volume / (area * area * area)},
      {C::Shape, "SphericalDisproportion",
       area / (4.0 * kPi * equivalent_radius * equivalent_radius)},
      {C::Shape, "Maximum3DDiameter", diameters.max3d},
      {C::Shape, "Maximum2DDiameterSlice", diameters.slice},
      {C::Shape, "Maximum2DDiameterColumn", diameters.column},
      {C::Shape, "Maximum2DDiameterRow", diameters.row},
      {C::Shape, "MajorAxisLength", major},
      {C::Shape, "MinorAxisLength", minor},
      {C::Shape, "LeastAxisLength", least},
      {C::Shape, "Elongation", elongation},
      {C::Shape, "Flatness", flatness},
  });
  return out;
}

FeatureVector shape_features(const BinaryMask& m) { return analyze_shape(m).features; }

}  // namespace radsynth
