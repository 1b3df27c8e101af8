#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "radsynth/radiomics/matrices.hpp"
#include "radsynth/radiomics/mesh.hpp"
#include "radsynth/radiomics/roi.hpp"

namespace radsynth {

enum class FeatureClass { Shape, Histogram, Glcm, Glszm, Glrlm };

std::string_view to_string(FeatureClass c);

struct Feature {
  FeatureClass feature_class;
  std::string name;
  double value;
};

/// Ordered (class, name, value) triples.
class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::vector<Feature> entries) : entries_(std::move(entries)) {}

  const std::vector<Feature>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const Feature& operator[](std::size_t i) const { return entries_[i]; }

  /// Throws NotFound when no entry carries that name within the class.
  double value(FeatureClass c, std::string_view name) const;
  Eigen::VectorXd values() const;

  void append(const FeatureVector& other);

  friend bool operator==(const FeatureVector& a, const FeatureVector& b);

 private:
  std::vector<Feature> entries_;
};

inline constexpr std::size_t kShapeFeatureCount = 16;
inline constexpr std::size_t kHistogramFeatureCount = 18;
inline constexpr std::size_t kGlcmFeatureCount = 24;
inline constexpr std::size_t kGlszmFeatureCount = 16;
inline constexpr std::size_t kGlrlmFeatureCount = 16;
inline constexpr std::size_t kTextureFeatureCount =
    kHistogramFeatureCount + kGlcmFeatureCount + kGlszmFeatureCount + kGlrlmFeatureCount;
inline constexpr std::size_t kFeatureCount = kShapeFeatureCount + kTextureFeatureCount;

struct SchemaEntry {
  FeatureClass feature_class;
  std::string_view name;
};

/// Canonical 90-entry order: shape, histogram, GLCM, GLSZM, GLRLM.
const std::array<SchemaEntry, kFeatureCount>& feature_schema();

// --- shape -----------------------------------------------------------------

struct ShapeAnalysis {
  FeatureVector features;
  double voxel_volume = 0.0;     // voxel count times voxel volume, diagnostic only
  bool degenerate_axes = false;  // fewer than two voxels: axis features zeroed
};

ShapeAnalysis analyze_shape(const BinaryMask& m);
FeatureVector shape_features(const BinaryMask& m);

/// Foreground voxels with at least one background (or out-of-grid) face
/// neighbor, as physical voxel-center coordinates.
std::vector<Eigen::Vector3d> boundary_points(const BinaryMask& m);

struct Diameters {
  double max3d = 0.0;
  double slice = 0.0;   // pairs sharing z (x-y plane)
  double column = 0.0;  // pairs sharing x (y-z plane)
  double row = 0.0;     // pairs sharing y (x-z plane)
};
Diameters max_diameters(const BinaryMask& m);

// --- first order -----------------------------------------------------------

FeatureVector histogram_features(const DiscretizedRoi& roi);

/// Linear-interpolation percentile of sorted data, q in [0, 1].
double percentile_sorted(const std::vector<double>& sorted, double q);

// --- texture ---------------------------------------------------------------

/// Per-direction GLCM features (24, canonical order) of one matrix.
Eigen::VectorXd glcm_direction_features(const GrayLevelMatrix& m);
/// Mean over non-empty directions. Throws AllDirectionsEmpty.
FeatureVector glcm_features(const std::vector<GrayLevelMatrix>& matrices);

FeatureVector glszm_features(const GrayLevelMatrix& zones, Index voxel_count);
FeatureVector glszm_features(const DiscretizedRoi& roi);

/// Per-direction GLRLM features (16, canonical order).
Eigen::VectorXd glrlm_direction_features(const GrayLevelMatrix& runs, Index voxel_count);
FeatureVector glrlm_features(const std::vector<GrayLevelMatrix>& runs, Index voxel_count);
FeatureVector glrlm_features(const DiscretizedRoi& roi);

// --- full extraction -------------------------------------------------------

struct ExtractionConfig {
  DiscretizationRule discretization = FixedBinCount{32};
  /// Worker threads for the independent feature families; 1 runs inline.
  int threads = 1;
};

FeatureVector extract_all(const VoxelVolume& v, const BinaryMask& m,
                          const ExtractionConfig& config = {});

/// Texture-only extraction (74 entries) for callers that do not need shape.
FeatureVector extract_texture(const VoxelVolume& v, const BinaryMask& m,
                              const ExtractionConfig& config = {});

// --- conditioning ----------------------------------------------------------

enum class ConditioningKind { Shape, Texture };

struct NormalizationStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

struct ConditioningVector {
  ConditioningKind kind;
  Eigen::VectorXd values;
  std::optional<NormalizationStats> stats;

  static std::size_t expected_length(ConditioningKind kind) {
    return kind == ConditioningKind::Shape ? kShapeFeatureCount : kTextureFeatureCount;
  }
  /// Throws WrongLength / ZeroStd when the invariants do not hold.
  void validate() const;
};

struct SplitConditioning {
  ConditioningVector shape;
  ConditioningVector texture;
};

/// Splits a canonical 90-vector into r_sh (16) and r_tx (74); stats (90
/// entries, ordered like the schema) z-score both parts when given.
SplitConditioning split_conditioning(const FeatureVector& fv,
                                     const std::optional<NormalizationStats>& stats = std::nullopt);

// --- serialization ---------------------------------------------------------

/// `class,name,value` with 9 significant digits.
std::string features_to_csv(const FeatureVector& fv);
std::string features_to_json(const FeatureVector& fv);
std::string feature_schema_json();

}  // namespace radsynth
