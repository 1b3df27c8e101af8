#include <algorithm>
#include <cmath>

#include "radsynth/radiomics/features.hpp"

namespace radsynth {

double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyMask, "percentile of empty data");
  const double position = q * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(position));
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  const double frac = position - static_cast<double>(below);
  return sorted[below] + frac * (sorted[above] - sorted[below]);
}

FeatureVector histogram_features(const DiscretizedRoi& roi) {
  if (roi.voxel_count == 0) throw Error(ErrorCode::EmptyMask, "histogram of empty ROI");
  std::vector<double> x = roi.intensities;
  const auto n = static_cast<double>(x.size());
  std::sort(x.begin(), x.end());

  double sum = 0.0, sum_sq = 0.0;
  for (double v : x) {
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, mad = 0.0;
  for (double v : x) {
    const double c = v - mean;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
    mad += std::abs(c);
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  mad /= n;

  const double p10 = percentile_sorted(x, 0.10);
  const double p90 = percentile_sorted(x, 0.90);
  double robust_sum = 0.0;
  std::size_t robust_n = 0;
  for (double v : x) {
    if (v >= p10 && v <= p90) {
      robust_sum += v;
      ++robust_n;
    }
  }
  const double robust_mean = robust_sum / static_cast<double>(robust_n);
  double robust_mad = 0.0;
  for (double v : x) {
    if (v >= p10 && v <= p90) robust_mad += std::abs(v - robust_mean);
  }
  robust_mad /= static_cast<double>(robust_n);

  std::vector<double> histogram(static_cast<std::size_t>(roi.gray_levels), 0.0);
  for (Index i = 0; i < roi.levels.size(); ++i) {
    if (roi.levels[i] > 0) histogram[roi.levels[i] - 1] += 1.0;
  }
  double entropy = 0.0, uniformity = 0.0;
  for (double count : histogram) {
    if (count == 0.0) continue;
    const double p = count / n;
    entropy -= p * std::log2(p);
    uniformity += p * p;
  }

  const double skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  const double kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 3.0;

  using C = FeatureClass;
  return FeatureVector({
      {C::Histogram, "Energy", sum_sq},
      {C::Histogram, "Entropy", entropy},
      {C::Histogram, "Minimum", x.front()},
      {C::Histogram, "Maximum", x.back()},
      {C::Histogram, "Mean", mean},
      {C::Histogram, "Median", percentile_sorted(x, 0.5)},
      {C::Histogram, "10Percentile", p10},
      {C::Histogram, "90Percentile", p90},
      {C::Histogram, "InterquartileRange", percentile_sorted(x, 0.75) - percentile_sorted(x, 0.25)},
      {C::Histogram, "Range", x.back() - x.front()},
      {C::Histogram, "MeanAbsoluteDeviation", mad},
      {C::Histogram, "RobustMeanAbsoluteDeviation", robust_mad},
      {C::Histogram, "RootMeanSquared", std::sqrt(sum_sq / n)},
      {C::Histogram, "StandardDeviation", std::sqrt(m2)},
      {C::Histogram, "Skewness", skewness},
      {C::Histogram, "Kurtosis", kurtosis},
      {C::Histogram, "Variance", m2},
      {C::Histogram, "Uniformity", uniformity},
  });
}

}  // namespace radsynth
