#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "radsynth/radiomics/features.hpp"
#include "radsynth/volume.hpp"

namespace radsynth {

struct GridSpec {
  Dims dims = Dims::Constant(96);
  Spacing spacing = Spacing::Ones();
};

/// Parametric stand-in for a shape generator. The surface is the star-convex
/// radius field r(u) = r0 * e(u) * (1 + alpha * P(u)), where e is the
/// ellipsoid with the given axis ratios (normalized to unit product) and P a
/// seeded real spherical-harmonic mixture of degrees 2..harmonic_degree
/// scaled to max |P| = 1.
struct ShapeSpec {
  double target_volume = 4188.79;  // mm^3
  /// Unset leaves alpha at lobulation_amplitude; set, alpha is searched in
  /// [0, lobulation_amplitude] to hit it.
  std::optional<double> target_sphericity;
  Eigen::Vector3d axis_ratios = Eigen::Vector3d::Ones();
  double lobulation_amplitude = 0.0;
  int harmonic_degree = 4;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TextureSpec {
  double mean = 0.5;
  double std = 0.1;
  double correlation_length = 2.0;  // mm, Gaussian kernel sigma
  double histogram_skew = 0.0;      // [-1, 1]
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedMask {
  BinaryMask mask;
  double volume = 0.0;      // mesh volume, mm^3
  double sphericity = 0.0;  // mesh sphericity
  double amplitude = 0.0;   // alpha used
  double radius = 0.0;      // r0 used, mm
};

inline constexpr double kVolumeTolerance = 0.02;      // relative
inline constexpr double kSphericityTolerance = 0.02;  // absolute

/// Throws TargetUnreachable when the volume or sphericity target cannot be
/// met within tolerance, GridTooSmall when the shape would touch the grid
/// border, BadParams for an invalid spec. The mask is one 26-connected
/// component containing the grid-center voxel.
GeneratedMask generate_mask_report(const ShapeSpec& spec, const GridSpec& grid);
BinaryMask generate_mask(const ShapeSpec& spec, const GridSpec& grid);

/// Seeded white noise, Gaussian-smoothed with sigma = correlation_length mm,
/// standardized, skewed by a monotone exponential map and mapped to
/// (mean, std).
VoxelVolume generate_texture(const TextureSpec& spec, const GridSpec& grid);

/// Smooth low-contrast background with a brighter ellipsoidal organ.
VoxelVolume generate_host(const GridSpec& grid, std::uint64_t seed);

/// Texture under the mask, host elsewhere, with a linear cross-fade over the
/// voxels within blend_margin_mm of the mask.
VoxelVolume insert_tumor(const VoxelVolume& host, const BinaryMask& m, const VoxelVolume& texture,
                         double blend_margin_mm);

// --- conditioning sweeps ------------------------------------------------------

enum class SweepKind { Shape, Texture };

/// Swept quantity: "volume" or "sphericity" for shape sweeps,
/// "correlation_length" for texture sweeps.
struct SweepDefinition {
  SweepKind kind = SweepKind::Shape;
  std::string parameter = "volume";
  std::vector<double> targets;
  ShapeSpec shape;      // base shape; also the fixed ROI of texture sweeps
  TextureSpec texture;  // base texture
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SweepRow {
  int point_index = 0;
  std::uint64_t seed = 0;
  std::vector<double> targets;
  std::vector<double> achieved;
};

struct SweepResult {
  SweepKind kind = SweepKind::Shape;
  std::vector<std::string> target_names;
  std::vector<std::string> achieved_names;
  std::vector<SweepRow> rows;
  std::map<std::string, std::string> method;

  std::vector<double> target_column(std::size_t k) const;
  std::vector<double> achieved_column(const std::string& name) const;
};

/// Points spaced evenly between lo and hi (inclusive).
std::vector<double> linear_targets(double lo, double hi, int points);
/// Points spaced evenly in log between lo and hi (inclusive).
std::vector<double> geometric_targets(double lo, double hi, int points);

/// Seed streams a sphericity point tries before giving up with
/// TargetUnreachable.
inline constexpr int kSphericitySeedAttempts = 8;

/// Generates each point, re-extracts its features and records target vs
/// achieved. Needs at least 10 points (BadParams). Point i uses seed
/// `seed + i`; a sphericity point the pattern cannot reach moves on to
/// `seed + i + k * points` and the row records the seed that was used.
SweepResult run_conditioning_sweep(const SweepDefinition& def, const GridSpec& grid,
                                   const ExtractionConfig& extraction = {});

/// `point_index,seed,target_<name>...,achieved_<name>...`
std::string sweep_to_csv(const SweepResult& result);
std::string sweep_manifest_json(const SweepDefinition& def, const GridSpec& grid, const SweepResult& result);

std::string_view to_string(SweepKind kind);
SweepKind parse_sweep_kind(const std::string& name);

}  // namespace radsynth
