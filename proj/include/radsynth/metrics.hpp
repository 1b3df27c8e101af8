#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "radsynth/volume.hpp"

namespace radsynth {

struct MetricReport {
  std::string metric;
  double value = 0.0;
  /// Set when the value is a stand-in for +inf (PSNR of identical inputs).
  bool capped = false;
  std::map<std::string, double> parameters;
  std::vector<std::string> inputs;

  /// One JSON object on a single line, without the trailing newline.
  std::string to_json_line() const;
};

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(range^2 / MSE). Identical inputs report kPsnrCap with `capped`.
/// Throws DimMismatch, BadParams for a non-positive range.
MetricReport psnr(const VoxelVolume& a, const VoxelVolume& b, double data_range = 1.0,
                  std::vector<std::string> inputs = {});

struct SsimOptions {
  int window = 7;
  double sigma = 1.5;
  double data_range = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean local SSIM over every full window^3 position of the volume, with
/// normalized Gaussian window weights. Throws DimMismatch, TooSmall when any
/// dimension is below the window.
MetricReport ssim3d(const VoxelVolume& a, const VoxelVolume& b, const SsimOptions& options = {},
                    std::vector<std::string> inputs = {});

/// Sample Pearson correlation. Needs equal lengths >= 3 (LengthMismatch,
/// TooSmall) and non-constant inputs (ConstantInput).
double pearson(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of the average ranks.
double spearman(std::span<const double> x, std::span<const double> y);
/// 1-based ranks; tied values share the mean of their positions.
Eigen::ArrayXd average_ranks(std::span<const double> x);

struct CorrelationSummary {
  double pearson = 0.0;
  double spearman = 0.0;
};
CorrelationSummary correlate(std::span<const double> x, std::span<const double> y);

/// 2|A and B| / (|A| + |B|), 1 when both are empty. Throws DimMismatch.
double dice(const BinaryMask& a, const BinaryMask& b);

}  // namespace radsynth
