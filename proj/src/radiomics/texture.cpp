#include <cmath>

#include <Eigen/Eigenvalues>

#include "radsynth/radiomics/features.hpp"

namespace radsynth {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

FeatureVector named(FeatureClass c, std::size_t offset, const Eigen::VectorXd& values) {
  const auto& schema = feature_schema();
  std::vector<Feature> out;
  for (Index k = 0; k < values.size(); ++k) {
    out.push_back({c, std::string(schema[offset + static_cast<std::size_t>(k)].name), values[k]});
  }
  return FeatureVector(std::move(out));
}

// Second largest eigenvalue of Q(i,k) = sum_j p(i,j) p(k,j) / (px(i) py(j)),
// computed on the similar symmetric matrix D^-1/2 P Dy^-1 P^T D^-1/2.
double maximal_correlation(const Eigen::MatrixXd& p, const Eigen::VectorXd& px) {
  std::vector<Index> support;
  for (Index i = 0; i < px.size(); ++i) {
    if (px[i] > 0.0) support.push_back(i);
  }
  if (support.size() < 2) return 1.0;
  const auto k = static_cast<Index>(support.size());
  Eigen::MatrixXd a(k, k);  // P restricted to the support, scaled
  for (Index r = 0; r < k; ++r) {
    for (Index c = 0; c < k; ++c) {
      a(r, c) = p(support[r], support[c]) / std::sqrt(px[support[r]] * px[support[c]]);
    }
  }
  // With symmetric P and px = py, D^-1/2 P D^-1 P D^-1/2 = A A^T.
  const Eigen::MatrixXd s = a * a.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
  const double second = solver.eigenvalues()[k - 2];
  return std::sqrt(std::max(second, 0.0));
}

}  // namespace

Eigen::VectorXd glcm_direction_features(const GrayLevelMatrix& m) {
  if (m.empty()) throw Error(ErrorCode::AllDirectionsEmpty, "GLCM direction has no pairs");
  const Eigen::MatrixXd p = m.normalized();
  const Index ng = p.rows();
  const Eigen::VectorXd px = p.rowwise().sum();
  const Eigen::VectorXd levels = Eigen::VectorXd::LinSpaced(ng, 1.0, static_cast<double>(ng));

  const double mu = px.dot(levels);
  const double var = px.dot((levels.array() - mu).square().matrix());

  Eigen::VectorXd p_sum = Eigen::VectorXd::Zero(2 * ng + 1);  // index i + j
  Eigen::VectorXd p_diff = Eigen::VectorXd::Zero(ng);        // index |i - j|
  double autocorrelation = 0.0, prominence = 0.0, shade = 0.0, tendency = 0.0, contrast = 0.0;
  double energy = 0.0, joint_entropy = 0.0, idm = 0.0, id = 0.0, idn = 0.0, idmn = 0.0;
  double max_p = 0.0, hxy1 = 0.0, hxy2 = 0.0;
  const double ngd = static_cast<double>(ng);
  for (Index j = 0; j < ng; ++j) {
    for (Index i = 0; i < ng; ++i) {
      const double pij = p(i, j);
      const double li = static_cast<double>(i + 1), lj = static_cast<double>(j + 1);
      const double pxpy = px[i] * px[j];
      if (pxpy > 0.0) hxy2 -= pxpy * std::log2(pxpy);
      if (pij == 0.0) continue;
      const double d = std::abs(li - lj);
      const double s = li + lj - 2.0 * mu;
      p_sum[i + j + 2] += pij;
      p_diff[static_cast<Index>(d)] += pij;
      autocorrelation += li * lj * pij;
      prominence += s * s * s * s * pij;
      shade += s * s * s * pij;
      tendency += s * s * pij;
      contrast += d * d * pij;
      energy += pij * pij;
      joint_entropy -= plogp(pij);
      idm += pij / (1.0 + d * d);
      id += pij / (1.0 + d);
      idn += pij / (1.0 + d / ngd);
      idmn += pij / (1.0 + d * d / (ngd * ngd));
      max_p = std::max(max_p, pij);
      hxy1 -= pij * std::log2(pxpy);
    }
  }
  double hx = 0.0;
  for (Index i = 0; i < ng; ++i) hx -= plogp(px[i]);

  double diff_average = 0.0, diff_entropy = 0.0, inverse_variance = 0.0;
  for (Index k = 0; k < ng; ++k) {
    diff_average += static_cast<double>(k) * p_diff[k];
    diff_entropy -= plogp(p_diff[k]);
    if (k > 0) inverse_variance += p_diff[k] / static_cast<double>(k * k);
  }
  double diff_variance = 0.0;
  for (Index k = 0; k < ng; ++k) {
    diff_variance += (static_cast<double>(k) - diff_average) * (static_cast<double>(k) - diff_average) * p_diff[k];
  }
  double sum_average = 0.0, sum_entropy = 0.0;
  for (Index k = 2; k <= 2 * ng; ++k) {
    sum_average += static_cast<double>(k) * p_sum[k];
    sum_entropy -= plogp(p_sum[k]);
  }

  const double correlation = var > 0.0 ? (autocorrelation - mu * mu) / var : 1.0;
  const double imc1 = hx > 0.0 ? (joint_entropy - hxy1) / hx : 0.0;
  const double imc2 = hxy2 > joint_entropy ? std::sqrt(1.0 - std::exp(-2.0 * (hxy2 - joint_entropy))) : 0.0;

  Eigen::VectorXd f(24);
  f << autocorrelation, mu, prominence, shade, tendency, contrast, correlation, diff_average,
      diff_entropy, diff_variance, energy, joint_entropy, imc1, imc2, idm,
      maximal_correlation(p, px), id, idn, idmn, inverse_variance, max_p, sum_average, sum_entropy,
      var;
  return f;
}

FeatureVector glcm_features(const std::vector<GrayLevelMatrix>& matrices) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(kGlcmFeatureCount);
  int used = 0;
  for (const auto& m : matrices) {
    if (m.empty()) continue;
    sum += glcm_direction_features(m);
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorCode::AllDirectionsEmpty, "no GLCM direction has in-mask neighbor pairs");
  }
  return named(FeatureClass::Glcm, kShapeFeatureCount + kHistogramFeatureCount, sum / used);
}

namespace {

// Shared by GLSZM and GLRLM: the 16 features over a (level, size) matrix.
// `voxel_count` is the denominator of the percentage feature.
Eigen::VectorXd zone_like_features(const GrayLevelMatrix& m, Index voxel_count) {
  const double nz = static_cast<double>(m.total);
  const Index ng = m.counts.rows();
  const Index ns = m.counts.cols();
  const Eigen::MatrixXd p = m.counts.cast<double>() / nz;
  Eigen::VectorXd by_level = m.counts.cast<double>().rowwise().sum();
  Eigen::VectorXd by_size = m.counts.cast<double>().colwise().sum().transpose();

  double small = 0.0, large = 0.0, low = 0.0, high = 0.0, small_low = 0.0, small_high = 0.0;
  double large_low = 0.0, large_high = 0.0, entropy = 0.0, mu_i = 0.0, mu_j = 0.0;
  for (Index c = 0; c < ns; ++c) {
    const double j = m.column_value(c);
    for (Index r = 0; r < ng; ++r) {
      const double pij = p(r, c);
      if (pij == 0.0) continue;
      const double i = static_cast<double>(r + 1);
      small += pij / (j * j);
      large += pij * j * j;
      low += pij / (i * i);
      high += pij * i * i;
      small_low += pij / (i * i * j * j);
      small_high += pij * i * i / (j * j);
      large_low += pij * j * j / (i * i);
      large_high += pij * i * i * j * j;
      entropy -= plogp(pij);
      mu_i += pij * i;
      mu_j += pij * j;
    }
  }
  double var_i = 0.0, var_j = 0.0;
  for (Index c = 0; c < ns; ++c) {
    const double j = m.column_value(c);
    for (Index r = 0; r < ng; ++r) {
      const double pij = p(r, c);
      if (pij == 0.0) continue;
      const double i = static_cast<double>(r + 1);
      var_i += pij * (i - mu_i) * (i - mu_i);
      var_j += pij * (j - mu_j) * (j - mu_j);
    }
  }
  const double gln = by_level.squaredNorm() / nz;
  const double szn = by_size.squaredNorm() / nz;

  Eigen::VectorXd f(16);
  f << small, large, gln, gln / nz, szn, szn / nz, nz / static_cast<double>(voxel_count), var_i,
      var_j, entropy, low, high, small_low, small_high, large_low, large_high;
  return f;
}

}  // namespace

FeatureVector glszm_features(const GrayLevelMatrix& zones, Index voxel_count) {
  if (zones.empty()) throw Error(ErrorCode::EmptyMask, "GLSZM of empty ROI");
  return named(FeatureClass::Glszm,
               kShapeFeatureCount + kHistogramFeatureCount + kGlcmFeatureCount,
               zone_like_features(zones, voxel_count));
}

FeatureVector glszm_features(const DiscretizedRoi& roi) {
  return glszm_features(glszm_matrix(roi), roi.voxel_count);
}

Eigen::VectorXd glrlm_direction_features(const GrayLevelMatrix& runs, Index voxel_count) {
  if (runs.empty()) throw Error(ErrorCode::EmptyMask, "GLRLM of empty ROI");
  return zone_like_features(runs, voxel_count);
}

FeatureVector glrlm_features(const std::vector<GrayLevelMatrix>& runs, Index voxel_count) {
  if (runs.empty()) throw Error(ErrorCode::EmptyMask, "no GLRLM directions");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(kGlrlmFeatureCount);
  for (const auto& m : runs) sum += glrlm_direction_features(m, voxel_count);
  return named(FeatureClass::Glrlm, kFeatureCount - kGlrlmFeatureCount,
               sum / static_cast<double>(runs.size()));
}

FeatureVector glrlm_features(const DiscretizedRoi& roi) {
  return glrlm_features(glrlm_matrices(roi), roi.voxel_count);
}

}  // namespace radsynth
