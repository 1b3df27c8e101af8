#include "radsynth/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <memory>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "radsynth/random.hpp"
#include "radsynth/radiomics/mesh.hpp"

namespace radsynth {

namespace {

constexpr double kPi = std::numbers::pi;

// Sub-voxel offset of the shape center from the grid-center voxel. Without
// it, voxels enter the mask in symmetric groups of up to 48 as r0 grows and
// small volume targets cannot be hit.
const Eigen::Array3d kCenterOffset(0.137, 0.291, 0.413);

Eigen::Vector3d unit_direction(const Eigen::Vector3d& p) {
  const double n = p.norm();
  return n > 0.0 ? Eigen::Vector3d(p / n) : Eigen::Vector3d(0, 0, 1);
}

/// Real spherical-harmonic mixture of degrees 2..L, normalized so that the
/// maximum of |P| over a dense direction set is 1.
class HarmonicMixture {
 public:
  HarmonicMixture(int degree, std::uint64_t seed) : degree_(degree) {
    Rng rng(seed);
    for (int l = 2; l <= degree; ++l) {
      for (int m = -l; m <= l; ++m) coefficients_.push_back(rng.normal() / l);
    }
    double peak = 0.0;
    const int samples = 4000;
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < samples; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / samples;
      const double r = std::sqrt(1.0 - z * z);
      peak = std::max(peak, std::abs(raw(Eigen::Vector3d(r * std::cos(golden * k), r * std::sin(golden * k), z))));
    }
    scale_ = peak > 0.0 ? 1.0 / peak : 0.0;
  }

  double operator()(const Eigen::Vector3d& u) const { return scale_ * raw(u); }

 private:
  double raw(const Eigen::Vector3d& u) const {
    const double theta = std::acos(std::clamp(u.z(), -1.0, 1.0));
    const double phi = std::atan2(u.y(), u.x());
    double sum = 0.0;
    std::size_t k = 0;
    for (int l = 2; l <= degree_; ++l) {
      for (int m = -l; m <= l; ++m, ++k) {
        const auto am = static_cast<unsigned>(std::abs(m));
        const double y = std::sph_legendre(static_cast<unsigned>(l), am, theta);
        const double basis = m == 0 ? y : std::numbers::sqrt2 * y * (m > 0 ? std::cos(m * phi) : std::sin(-m * phi));
        sum += coefficients_[k] * basis;
      }
    }
    return sum;
  }

  int degree_;
  std::vector<double> coefficients_;
  double scale_ = 0.0;
};

/// Voxel-level precomputation for the star-convex field of one spec.
class ShapeField {
 public:
  ShapeField(const ShapeSpec& spec, const GridSpec& grid) : grid_(grid) {
    const Dims& d = grid.dims;
    center_voxel_ = d / 2;
    const Eigen::Array3d center_mm = (center_voxel_.cast<double>() + kCenterOffset) * grid.spacing.array();
    const Eigen::Array3d ratios = spec.axis_ratios.array() / std::cbrt(spec.axis_ratios.prod());
    const auto mixture = spec.lobulation_amplitude > 0.0
                             ? std::make_unique<HarmonicMixture>(spec.harmonic_degree, spec.seed)
                             : nullptr;
    const Index n = static_cast<Index>(d.prod());
    distance_.resize(n);
    ellipsoid_.resize(n);
    perturbation_ = Eigen::ArrayXd::Zero(n);
    Index i = 0;
    for (int z = 0; z < d[2]; ++z)
      for (int y = 0; y < d[1]; ++y)
        for (int x = 0; x < d[0]; ++x, ++i) {
          const Eigen::Vector3d p = (Eigen::Array3d(x, y, z) * grid.spacing.array() - center_mm).matrix();
          const Eigen::Vector3d u = unit_direction(p);
          distance_[i] = p.norm();
          ellipsoid_[i] = 1.0 / (u.array() / ratios).matrix().norm();
          if (mixture) perturbation_[i] = (*mixture)(u);
        }
  }

  /// Mask of {|p| <= r0 e(u) (1 + alpha P(u))}, reduced to the 26-connected
  /// component of the grid-center voxel.
  BinaryMask mask(double alpha, double r0) const {
    const Eigen::ArrayXd reach = r0 * ellipsoid_ * (1.0 + alpha * perturbation_).max(0.0);
    BinaryMask::Storage inside = (distance_ <= reach).cast<std::uint8_t>();
    return BinaryMask(grid_.dims, grid_.spacing, keep_center_component(inside));
  }

  const Dims& center_voxel() const { return center_voxel_; }

 private:
  BinaryMask::Storage keep_center_component(const BinaryMask::Storage& inside) const {
    const Dims& d = grid_.dims;
    BinaryMask::Storage out = BinaryMask::Storage::Zero(inside.size());
    auto index = [&](int x, int y, int z) { return x + static_cast<Index>(d[0]) * (y + static_cast<Index>(d[1]) * z); };
    const Index start = index(center_voxel_[0], center_voxel_[1], center_voxel_[2]);
    if (!inside[start]) return out;
    std::vector<Eigen::Array3i> stack{center_voxel_};
    out[start] = 1;
    while (!stack.empty()) {
      const Eigen::Array3i p = stack.back();
      stack.pop_back();
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const Eigen::Array3i q = p + Eigen::Array3i(dx, dy, dz);
            if ((q < 0).any() || (q >= d).any()) continue;
            const Index j = index(q[0], q[1], q[2]);
            if (inside[j] && !out[j]) {
              out[j] = 1;
              stack.push_back(q);
            }
          }
    }
    return out;
  }

  GridSpec grid_;
  Dims center_voxel_;
  Eigen::ArrayXd distance_;
  Eigen::ArrayXd ellipsoid_;
  Eigen::ArrayXd perturbation_;
};

bool touches_border(const BinaryMask& m) {
  if (foreground_count(m) == 0) return false;
  const BoundingBox box = bounding_box(m);
  return (box.min <= 0).any() || (box.max >= m.dims() - 1).any();
}

double sphericity_of(const MeshMeasures& mm) {
  return std::cbrt(36.0 * kPi * mm.volume * mm.volume) / mm.area;
}

/// Best r0 for the volume target at fixed alpha.
GeneratedMask fit_volume(const ShapeField& field, double alpha, double target) {
  auto evaluate = [&](double r0) {
    GeneratedMask g{field.mask(alpha, r0), 0.0, 0.0, alpha, r0};
    if (foreground_count(g.mask) > 0) {
      const MeshMeasures mm = mesh_measures(g.mask);
      g.volume = mm.volume;
      g.sphericity = sphericity_of(mm);
    }
    return g;
  };
  double lo = 0.0;
  double hi = std::cbrt(3.0 * target / (4.0 * kPi));
  GeneratedMask upper = evaluate(hi);
  for (int k = 0; upper.volume < target; ++k) {
    if (touches_border(upper.mask) || k > 60) {
      throw Error(ErrorCode::GridTooSmall, "grid cannot hold a shape of " + std::to_string(target) + " mm^3");
    }
    lo = hi;
    hi *= 1.25;
    upper = evaluate(hi);
  }
  GeneratedMask best = upper;
  for (int iter = 0; iter < 40; ++iter) {
    if (std::abs(best.volume - target) <= 0.25 * kVolumeTolerance * target) break;
    const double mid = 0.5 * (lo + hi);
    GeneratedMask g = evaluate(mid);
    if (std::abs(g.volume - target) < std::abs(best.volume - target)) best = g;
    (g.volume < target ? lo : hi) = mid;
  }
  if (touches_border(best.mask)) {
    throw Error(ErrorCode::GridTooSmall, "shape touches the grid border; use a larger grid");
  }
  return best;
}

bool volume_ok(const GeneratedMask& g, double target) {
  return std::abs(g.volume - target) <= kVolumeTolerance * target;
}

}  // namespace

void ShapeSpec::validate() const {
  if (!(target_volume > 0.0) || !std::isfinite(target_volume)) {
    throw Error(ErrorCode::BadParams, "target_volume must be positive");
  }
  if (target_sphericity && !(*target_sphericity > 0.3 && *target_sphericity <= 1.0)) {
    throw Error(ErrorCode::BadParams, "target_sphericity must lie in (0.3, 1]");
  }
  if (!(axis_ratios.array() > 0.0).all() || !axis_ratios.allFinite()) {
    throw Error(ErrorCode::BadParams, "axis ratios must be positive");
  }
  if (!(lobulation_amplitude >= 0.0) || !std::isfinite(lobulation_amplitude)) {
    throw Error(ErrorCode::BadParams, "lobulation_amplitude must be >= 0");
  }
  if (harmonic_degree < 2 || harmonic_degree > 6) {
    throw Error(ErrorCode::BadParams, "harmonic_degree must lie in 2..6");
  }
}

void TextureSpec::validate() const {
  if (!std::isfinite(mean) || !std::isfinite(std) || !std::isfinite(correlation_length) ||
      !std::isfinite(histogram_skew)) {
    throw Error(ErrorCode::BadParams, "texture spec fields must be finite");
  }
  if (std < 0.0) throw Error(ErrorCode::BadParams, "texture std must be >= 0");
  if (correlation_length < 0.0) throw Error(ErrorCode::BadParams, "correlation_length must be >= 0");
  if (histogram_skew < -1.0 || histogram_skew > 1.0) {
    throw Error(ErrorCode::BadParams, "histogram_skew must lie in [-1, 1]");
  }
}

GeneratedMask generate_mask_report(const ShapeSpec& spec, const GridSpec& grid) {
  spec.validate();
  if ((grid.dims < 3).any()) throw Error(ErrorCode::GridTooSmall, "grid needs at least 3 voxels per axis");
  const ShapeField field(spec, grid);
  const double volume = spec.target_volume;

  if (!spec.target_sphericity) {
    GeneratedMask g = fit_volume(field, spec.lobulation_amplitude, volume);
    if (!volume_ok(g, volume)) {
      throw Error(ErrorCode::TargetUnreachable, "volume target " + std::to_string(volume) + " mm^3 missed (got " +
                                                    std::to_string(g.volume) + ")");
    }
    return g;
  }

  const double target = *spec.target_sphericity;
  auto miss = [&](const GeneratedMask& g) { return std::abs(g.sphericity - target); };
  GeneratedMask smooth = fit_volume(field, 0.0, volume);
  GeneratedMask best = smooth;
  if (spec.lobulation_amplitude > 0.0 && miss(best) > 0.25 * kSphericityTolerance) {
    GeneratedMask rough = fit_volume(field, spec.lobulation_amplitude, volume);
    if (miss(rough) < miss(best)) best = rough;
    if (target <= smooth.sphericity && target >= rough.sphericity) {
      // Sphericity falls as alpha grows; bisect between the two ends.
      double lo = 0.0, hi = spec.lobulation_amplitude;
      for (int iter = 0; iter < 40 && miss(best) > 0.25 * kSphericityTolerance; ++iter) {
        const double mid = 0.5 * (lo + hi);
        GeneratedMask g = fit_volume(field, mid, volume);
        if (volume_ok(g, volume) && (miss(g) < miss(best) || !volume_ok(best, volume))) best = g;
        (g.sphericity > target ? lo : hi) = mid;
      }
    }
  }
  if (miss(best) > kSphericityTolerance || !volume_ok(best, volume)) {
    std::ostringstream msg;
    msg << "sphericity target " << target << " unreachable at " << volume << " mm^3 with axis ratios "
        << spec.axis_ratios.transpose() << " and lobulation <= " << spec.lobulation_amplitude << " (closest "
        << best.sphericity << ")";
    throw Error(ErrorCode::TargetUnreachable, msg.str());
  }
  return best;
}

BinaryMask generate_mask(const ShapeSpec& spec, const GridSpec& grid) {
  return generate_mask_report(spec, grid).mask;
}

namespace {

Eigen::ArrayXd gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return Eigen::ArrayXd::Ones(1);
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  Eigen::ArrayXd k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  return k / k.sum();
}

// Valid-mode convolution along one axis of an x-fastest field.
Eigen::ArrayXd convolve_axis(const Eigen::ArrayXd& in, Dims& dims, int axis, const Eigen::ArrayXd& kernel) {
  const int taps = static_cast<int>(kernel.size());
  if (taps == 1) return in;
  Dims out_dims = dims;
  out_dims[axis] -= taps - 1;
  const Index stride = axis == 0 ? 1 : axis == 1 ? dims[0] : static_cast<Index>(dims[0]) * dims[1];
  Eigen::ArrayXd out(static_cast<Index>(out_dims.prod()));
  Index o = 0;
  for (int z = 0; z < out_dims[2]; ++z)
    for (int y = 0; y < out_dims[1]; ++y)
      for (int x = 0; x < out_dims[0]; ++x) {
        const Index base = x + static_cast<Index>(dims[0]) * (y + static_cast<Index>(dims[1]) * z);
        double acc = 0.0;
        for (int k = 0; k < taps; ++k) acc += kernel[k] * in[base + k * stride];
        out[o++] = acc;
      }
  dims = out_dims;
  return out;
}

Eigen::ArrayXd standardized(const Eigen::ArrayXd& x) {
  const double mean = x.mean();
  const double sd = std::sqrt((x - mean).square().mean());
  if (!(sd > 0.0)) return Eigen::ArrayXd::Zero(x.size());
  return (x - mean) / sd;
}

}  // namespace

VoxelVolume generate_texture(const TextureSpec& spec, const GridSpec& grid) {
  spec.validate();
  std::array<Eigen::ArrayXd, 3> kernels;
  Dims padded = grid.dims;
  for (int a = 0; a < 3; ++a) {
    kernels[a] = gaussian_kernel(spec.correlation_length / grid.spacing[a]);
    padded[a] += static_cast<int>(kernels[a].size()) - 1;
  }
  Rng rng(spec.seed);
  Eigen::ArrayXd field(static_cast<Index>(padded.prod()));
  for (Index i = 0; i < field.size(); ++i) field[i] = rng.normal();
  for (int a = 0; a < 3; ++a) field = convolve_axis(field, padded, a, kernels[a]);

  Eigen::ArrayXd z = standardized(field);
  if (spec.histogram_skew != 0.0) {
    const double lambda = 2.0 * spec.histogram_skew;
    z = standardized(z.unaryExpr([lambda](double v) { return std::expm1(lambda * v) / lambda; }));
  }
  return VoxelVolume(grid.dims, grid.spacing, (spec.mean + spec.std * z).cast<float>());
}

VoxelVolume generate_host(const GridSpec& grid, std::uint64_t seed) {
  TextureSpec background{0.3, 0.03, 6.0, 0.0, seed};
  VoxelVolume base = generate_texture(background, grid);
  VoxelVolume::Storage data = base.data();
  const Eigen::Array3d center = (grid.dims.cast<double>() - 1.0) / 2.0;
  const Eigen::Array3d semi = grid.dims.cast<double>() * 0.38;
  Index i = 0;
  for (int z = 0; z < grid.dims[2]; ++z)
    for (int y = 0; y < grid.dims[1]; ++y)
      for (int x = 0; x < grid.dims[0]; ++x, ++i) {
        const double r = ((Eigen::Array3d(x, y, z) - center) / semi).matrix().norm();
        // organ with a soft one-voxel rim
        const double w = std::clamp((1.0 - r) * semi.minCoeff(), 0.0, 1.0);
        data[i] += static_cast<float>(0.15 * w);
      }
  return VoxelVolume(grid.dims, grid.spacing, std::move(data));
}

VoxelVolume insert_tumor(const VoxelVolume& host, const BinaryMask& m, const VoxelVolume& texture,
                         double blend_margin_mm) {
  require_same_geometry(host, m);
  require_same_geometry(host, texture);
  if (!(blend_margin_mm >= 0.0) || !std::isfinite(blend_margin_mm)) {
    throw Error(ErrorCode::BadParams, "blend margin must be >= 0");
  }
  VoxelVolume::Storage out = (m.data() != 0).select(texture.data(), host.data());
  if (blend_margin_mm == 0.0 || foreground_count(m) == 0) return VoxelVolume(host.dims(), host.spacing(), out);

  const Spacing& s = m.spacing();
  const Eigen::Array3i reach = (blend_margin_mm / s.array()).floor().cast<int>();
  struct Offset {
    Eigen::Array3i d;
    double mm;
  };
  std::vector<Offset> offsets;
  for (int dz = -reach[2]; dz <= reach[2]; ++dz)
    for (int dy = -reach[1]; dy <= reach[1]; ++dy)
      for (int dx = -reach[0]; dx <= reach[0]; ++dx) {
        const double mm = Eigen::Vector3d(dx * s[0], dy * s[1], dz * s[2]).norm();
        if (mm > 0.0 && mm <= blend_margin_mm) offsets.push_back({Eigen::Array3i(dx, dy, dz), mm});
      }
  std::sort(offsets.begin(), offsets.end(), [](const Offset& a, const Offset& b) { return a.mm < b.mm; });

  // Weight 1 at the mask, falling linearly and staying > 0 up to the margin.
  const double falloff = blend_margin_mm + s.minCoeff();
  const Dims& d = m.dims();
  for (int z = 0; z < d[2]; ++z)
    for (int y = 0; y < d[1]; ++y)
      for (int x = 0; x < d[0]; ++x) {
        if (m(x, y, z)) continue;
        for (const auto& o : offsets) {
          const Eigen::Array3i q = Eigen::Array3i(x, y, z) + o.d;
          if (!m.contains(q[0], q[1], q[2]) || !m(q[0], q[1], q[2])) continue;
          const double w = 1.0 - o.mm / falloff;
          const Index i = m.index(x, y, z);
          out[i] = static_cast<float>(w * texture[i] + (1.0 - w) * host[i]);
          break;
        }
      }
  return VoxelVolume(host.dims(), host.spacing(), std::move(out));
}

// --- sweeps -----------------------------------------------------------------

std::vector<double> SweepResult::target_column(std::size_t k) const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.targets.at(k));
  return out;
}

std::vector<double> SweepResult::achieved_column(const std::string& name) const {
  const auto it = std::find(achieved_names.begin(), achieved_names.end(), name);
  if (it == achieved_names.end()) throw Error(ErrorCode::NotFound, "no achieved column '" + name + "'");
  const auto k = static_cast<std::size_t>(it - achieved_names.begin());
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.achieved.at(k));
  return out;
}

std::vector<double> linear_targets(double lo, double hi, int points) {
  if (points < 2) throw Error(ErrorCode::BadParams, "need at least 2 sweep points");
  std::vector<double> out;
  for (int k = 0; k < points; ++k) out.push_back(lo + (hi - lo) * k / (points - 1));
  return out;
}

std::vector<double> geometric_targets(double lo, double hi, int points) {
  if (points < 2 || !(lo > 0.0) || !(hi > 0.0)) throw Error(ErrorCode::BadParams, "geometric sweep needs positive ends");
  std::vector<double> out;
  for (int k = 0; k < points; ++k) out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1)));
  return out;
}

namespace {

SweepRow run_point(const SweepDefinition& def, const GridSpec& grid, const ExtractionConfig& extraction, int index,
                   const BinaryMask* fixed_roi) {
  SweepRow row;
  row.point_index = index;
  row.seed = def.seed + static_cast<std::uint64_t>(index);
  const double target = def.targets[static_cast<std::size_t>(index)];
  row.targets = {target};
  if (def.kind == SweepKind::Shape) {
    ShapeSpec spec = def.shape;
    spec.seed = row.seed;
    std::optional<BinaryMask> generated;
    if (def.parameter == "volume") {
      spec.target_volume = target;
      generated = generate_mask(spec, grid);
    } else {
      spec.target_sphericity = target;
      // some lobulation patterns cannot get irregular enough; step to the
      // point's next seed stream, keeping streams disjoint across points
      const auto stride = static_cast<std::uint64_t>(def.targets.size());
      for (int attempt = 0; !generated; ++attempt) {
        spec.seed = row.seed + static_cast<std::uint64_t>(attempt) * stride;
        try {
          generated = generate_mask(spec, grid);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::TargetUnreachable || attempt + 1 == kSphericitySeedAttempts) throw;
        }
      }
      row.seed = spec.seed;
    }
    const BinaryMask& mask = *generated;
    const FeatureVector shape = shape_features(mask);
    const double volume = shape.value(FeatureClass::Shape, "MeshVolume");
    const double sphericity = shape.value(FeatureClass::Shape, "Sphericity");
    row.achieved = def.parameter == "volume" ? std::vector<double>{volume, sphericity}
                                             : std::vector<double>{sphericity, volume};
  } else {
    TextureSpec spec = def.texture;
    spec.seed = row.seed;
    spec.correlation_length = target;
    const VoxelVolume texture = generate_texture(spec, grid);
    const FeatureVector fv = extract_texture(texture, *fixed_roi, extraction);
    row.achieved = {fv.value(FeatureClass::Glcm, "Idm"), fv.value(FeatureClass::Glcm, "Contrast"),
                    fv.value(FeatureClass::Glcm, "Correlation"), fv.value(FeatureClass::Glrlm, "RunPercentage")};
  }
  return row;
}

}  // namespace

SweepResult run_conditioning_sweep(const SweepDefinition& def, const GridSpec& grid,
                                   const ExtractionConfig& extraction) {
  if (def.targets.size() < 10) {
    throw Error(ErrorCode::BadParams, "a conditioning sweep needs at least 10 points (got " +
                                          std::to_string(def.targets.size()) + ")");
  }
  SweepResult result;
  result.kind = def.kind;
  result.target_names = {def.parameter};
  std::optional<BinaryMask> roi;
  if (def.kind == SweepKind::Shape) {
    if (def.parameter == "volume") {
      result.achieved_names = {"volume", "sphericity"};
    } else if (def.parameter == "sphericity") {
      result.achieved_names = {"sphericity", "volume"};
    } else {
      throw Error(ErrorCode::BadParams, "shape sweeps take 'volume' or 'sphericity', not '" + def.parameter + "'");
    }
    result.method = {{"generator", "star-convex spherical-harmonic phantom"},
                     {"measurement", "marching-cubes mesh shape features"}};
  } else {
    if (def.parameter != "correlation_length") {
      throw Error(ErrorCode::BadParams, "texture sweeps take 'correlation_length', not '" + def.parameter + "'");
    }
    result.achieved_names = {"glcm_Idm", "glcm_Contrast", "glcm_Correlation", "glrlm_RunPercentage"};
    result.method = {{"generator", "gaussian-smoothed noise texture"},
                     {"measurement", "texture features over a fixed phantom ROI"}};
    roi = generate_mask(def.shape, grid);
  }

  const int n = static_cast<int>(def.targets.size());
  result.rows.resize(static_cast<std::size_t>(n));
  const int workers = std::max(1, def.threads);
  for (int start = 0; start < n; start += workers) {
    std::vector<std::future<SweepRow>> batch;
    for (int i = start; i < std::min(n, start + workers); ++i) {
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run_point,
                                 std::cref(def), std::cref(grid), std::cref(extraction), i,
                                 roi ? &*roi : nullptr));
    }
    for (int i = start; i < std::min(n, start + workers); ++i) {
      result.rows[static_cast<std::size_t>(i)] = batch[static_cast<std::size_t>(i - start)].get();
    }
  }
  return result;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "point_index,seed";
  for (const auto& name : result.target_names) out << ",target_" << name;
  for (const auto& name : result.achieved_names) out << ",achieved_" << name;
  out << '\n';
  char buf[32];
  for (const auto& row : result.rows) {
    out << row.point_index << ',' << row.seed;
    for (double v : row.targets) {
      std::snprintf(buf, sizeof buf, "%.9g", v);
      out << ',' << buf;
    }
    for (double v : row.achieved) {
      std::snprintf(buf, sizeof buf, "%.9g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string sweep_manifest_json(const SweepDefinition& def, const GridSpec& grid, const SweepResult& result) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(def.kind);
  j["parameter"] = def.parameter;
  j["points"] = def.targets.size();
  j["targets"] = def.targets;
  j["seed"] = def.seed;
  j["grid"] = {{"dims", {grid.dims[0], grid.dims[1], grid.dims[2]}},
               {"spacing", {grid.spacing[0], grid.spacing[1], grid.spacing[2]}}};
  nlohmann::ordered_json shape;
  shape["target_volume"] = def.shape.target_volume;
  shape["target_sphericity"] = def.shape.target_sphericity ? nlohmann::ordered_json(*def.shape.target_sphericity)
                                                           : nlohmann::ordered_json(nullptr);
  shape["axis_ratios"] = {def.shape.axis_ratios[0], def.shape.axis_ratios[1], def.shape.axis_ratios[2]};
  shape["lobulation_amplitude"] = def.shape.lobulation_amplitude;
  shape["harmonic_degree"] = def.shape.harmonic_degree;
  j["shape"] = shape;
  j["texture"] = {{"mean", def.texture.mean},
                  {"std", def.texture.std},
                  {"correlation_length", def.texture.correlation_length},
                  {"histogram_skew", def.texture.histogram_skew}};
  j["method"] = result.method;
  j["achieved"] = result.achieved_names;
  return j.dump(2);
}

std::string_view to_string(SweepKind kind) { return kind == SweepKind::Shape ? "shape" : "texture"; }

SweepKind parse_sweep_kind(const std::string& name) {
  if (name == "shape") return SweepKind::Shape;
  if (name == "texture") return SweepKind::Texture;
  throw Error(ErrorCode::BadParams, "unknown sweep kind '" + name + "'");
}

}  // namespace radsynth
