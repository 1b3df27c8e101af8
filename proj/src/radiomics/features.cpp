#include "radsynth/radiomics/features.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace radsynth {

std::string_view to_string(FeatureClass c) {
  switch (c) {
    case FeatureClass::Shape: return "shape";
    case FeatureClass::Histogram: return "histogram";
    case FeatureClass::Glcm: return "glcm";
    case FeatureClass::Glszm: return "glszm";
    case FeatureClass::Glrlm: return "glrlm";
  }
  return "unknown";
}

const std::array<SchemaEntry, kFeatureCount>& feature_schema() {
  using C = FeatureClass;
  static const std::array<SchemaEntry, kFeatureCount> schema{{
      {C::Shape, "MeshVolume"},
      {C::Shape, "SurfaceArea"},
      {C::Shape, "SurfaceVolumeRatio"},
      {C::Shape, "Sphericity"},
      {C::Shape, "Compactness1"},
      {C::Shape, "Compactness2"},
      {C::Shape, "SphericalDisproportion"},
      {C::Shape, "Maximum3DDiameter"},
      {C::Shape, "Maximum2DDiameterSlice"},
      {C::Shape, "Maximum2DDiameterColumn"},
      {C::Shape, "Maximum2DDiameterRow"},
      {C::Shape, "MajorAxisLength"},
      {C::Shape, "MinorAxisLength"},
      {C::Shape, "LeastAxisLength"},
      {C::Shape, "Elongation"},
      {C::Shape, "Flatness"},

      {C::Histogram, "Energy"},
      {C::Histogram, "Entropy"},
      {C::Histogram, "Minimum"},
      {C::Histogram, "Maximum"},
      {C::Histogram, "Mean"},
      {C::Histogram, "Median"},
      {C::Histogram, "10Percentile"},
      {C::Histogram, "90Percentile"},
      {C::Histogram, "InterquartileRange"},
      {C::Histogram, "Range"},
      {C::Histogram, "MeanAbsoluteDeviation"},
      {C::Histogram, "RobustMeanAbsoluteDeviation"},
      {C::Histogram, "RootMeanSquared"},
      {C::Histogram, "StandardDeviation"},
      {C::Histogram, "Skewness"},
      {C::Histogram, "Kurtosis"},
      {C::Histogram, "Variance"},
      {C::Histogram, "Uniformity"},

      {C::Glcm, "Autocorrelation"},
      {C::Glcm, "JointAverage"},
      {C::Glcm, "ClusterProminence"},
      {C::Glcm, "ClusterShade"},
      {C::Glcm, "ClusterTendency"},
      {C::Glcm, "Contrast"},
      {C::Glcm, "Correlation"},
      {C::Glcm, "DifferenceAverage"},
      {C::Glcm, "DifferenceEntropy"},
      {C::Glcm, "DifferenceVariance"},
      {C::Glcm, "JointEnergy"},
      {C::Glcm, "JointEntropy"},
      {C::Glcm, "Imc1"},
      {C::Glcm, "Imc2"},
      {C::Glcm, "Idm"},
      {C::Glcm, "MCC"},
      {C::Glcm, "Id"},
      {C::Glcm, "Idn"},
      {C::Glcm, "Idmn"},
      {C::Glcm, "InverseVariance"},
      {C::Glcm, "MaximumProbability"},
      {C::Glcm, "SumAverage"},
      {C::Glcm, "SumEntropy"},
      {C::Glcm, "SumSquares"},

      {C::Glszm, "SmallAreaEmphasis"},
      {C::Glszm, "LargeAreaEmphasis"},
      {C::Glszm, "GrayLevelNonUniformity"},
      {C::Glszm, "GrayLevelNonUniformityNormalized"},
      {C::Glszm, "SizeZoneNonUniformity"},
      {C::Glszm, "SizeZoneNonUniformityNormalized"},
      {C::Glszm, "ZonePercentage"},
      {C::Glszm, "GrayLevelVariance"},
      {C::Glszm, "ZoneVariance"},
      {C::Glszm, "ZoneEntropy"},
      {C::Glszm, "LowGrayLevelZoneEmphasis"},
      {C::Glszm, "HighGrayLevelZoneEmphasis"},
      {C::Glszm, "SmallAreaLowGrayLevelEmphasis"},
      {C::Glszm, "SmallAreaHighGrayLevelEmphasis"},
      {C::Glszm, "LargeAreaLowGrayLevelEmphasis"},
      {C::Glszm, "LargeAreaHighGrayLevelEmphasis"},

      {C::Glrlm, "ShortRunEmphasis"},
      {C::Glrlm, "LongRunEmphasis"},
      {C::Glrlm, "GrayLevelNonUniformity"},
      {C::Glrlm, "GrayLevelNonUniformityNormalized"},
      {C::Glrlm, "RunLengthNonUniformity"},
      {C::Glrlm, "RunLengthNonUniformityNormalized"},
      {C::Glrlm, "RunPercentage"},
      {C::Glrlm, "GrayLevelVariance"},
      {C::Glrlm, "RunVariance"},
      {C::Glrlm, "RunEntropy"},
      {C::Glrlm, "LowGrayLevelRunEmphasis"},
      {C::Glrlm, "HighGrayLevelRunEmphasis"},
      {C::Glrlm, "ShortRunLowGrayLevelEmphasis"},
      {C::Glrlm, "ShortRunHighGrayLevelEmphasis"},
      {C::Glrlm, "LongRunLowGrayLevelEmphasis"},
      {C::Glrlm, "LongRunHighGrayLevelEmphasis"},
  }};
  return schema;
}

double FeatureVector::value(FeatureClass c, std::string_view name) const {
  for (const auto& f : entries_) {
    if (f.feature_class == c && f.name == name) return f.value;
  }
  throw Error(ErrorCode::NotFound,
              "feature " + std::string(to_string(c)) + "/" + std::string(name) + " not present");
}

Eigen::VectorXd FeatureVector::values() const {
  Eigen::VectorXd out(static_cast<Index>(entries_.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) out[static_cast<Index>(i)] = entries_[i].value;
  return out;
}

void FeatureVector::append(const FeatureVector& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

bool operator==(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Feature& x = a[i];
    const Feature& y = b[i];
    if (x.feature_class != y.feature_class || x.name != y.name || x.value != y.value) return false;
  }
  return true;
}

void ConditioningVector::validate() const {
  const auto n = static_cast<Index>(expected_length(kind));
  if (values.size() != n) {
    throw Error(ErrorCode::WrongLength, "conditioning vector has " + std::to_string(values.size()) +
                                            " entries, expected " + std::to_string(n));
  }
  if (stats) {
    if (stats->mean.size() != n || stats->std.size() != n) {
      throw Error(ErrorCode::WrongLength, "normalization stats length mismatch");
    }
    if (!(stats->std.array() > 0.0).all()) {
      throw Error(ErrorCode::ZeroStd, "normalization std must be positive");
    }
  }
}

SplitConditioning split_conditioning(const FeatureVector& fv,
                                     const std::optional<NormalizationStats>& stats) {
  if (fv.size() != kFeatureCount) {
    throw Error(ErrorCode::WrongLength, "expected the canonical " + std::to_string(kFeatureCount) +
                                            "-entry feature vector, got " +
                                            std::to_string(fv.size()));
  }
  const auto& schema = feature_schema();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (fv[i].feature_class != schema[i].feature_class || fv[i].name != schema[i].name) {
      throw Error(ErrorCode::WrongLength, "feature vector is not in canonical order at " + fv[i].name);
    }
  }
  const Eigen::VectorXd all = fv.values();
  constexpr auto n_shape = static_cast<Index>(kShapeFeatureCount);
  constexpr auto n_texture = static_cast<Index>(kTextureFeatureCount);

  SplitConditioning out{{ConditioningKind::Shape, all.head(n_shape), std::nullopt},
                        {ConditioningKind::Texture, all.tail(n_texture), std::nullopt}};
  if (stats) {
    const auto n = static_cast<Index>(kFeatureCount);
    if (stats->mean.size() != n || stats->std.size() != n) {
      throw Error(ErrorCode::WrongLength, "normalization stats must have 90 entries");
    }
    if (!(stats->std.array() > 0.0).all()) {
      throw Error(ErrorCode::ZeroStd, "normalization std must be positive");
    }
    const Eigen::VectorXd z = (all - stats->mean).cwiseQuotient(stats->std);
    out.shape.values = z.head(n_shape);
    out.texture.values = z.tail(n_texture);
    out.shape.stats = NormalizationStats{stats->mean.head(n_shape), stats->std.head(n_shape)};
    out.texture.stats = NormalizationStats{stats->mean.tail(n_texture), stats->std.tail(n_texture)};
  }
  return out;
}

std::string features_to_csv(const FeatureVector& fv) {
  std::ostringstream out;
  out << "class,name,value\n";
  char buffer[64];
  for (const auto& f : fv.entries()) {
    std::snprintf(buffer, sizeof buffer, "%.9g", f.value);
    out << to_string(f.feature_class) << ',' << f.name << ',' << buffer << '\n';
  }
  return out.str();
}

std::string features_to_json(const FeatureVector& fv) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& f : fv.entries()) {
    rows.push_back({{"class", to_string(f.feature_class)}, {"name", f.name}, {"value", f.value}});
  }
  return rows.dump(2);
}

std::string feature_schema_json() {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  int index = 0;
  for (const auto& e : feature_schema()) {
    rows.push_back({{"class", to_string(e.feature_class)}, {"name", e.name}, {"index", index++}});
  }
  return rows.dump(2);
}

}  // namespace radsynth
