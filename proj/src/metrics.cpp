#include "radsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace radsynth {

namespace {

void require_same_dims(const Dims& a, const Dims& b) {
  if (!(a == b).all()) {
    throw Error(ErrorCode::DimMismatch, "metric inputs have different dims");
  }
}

void require_range(double data_range) {
  if (!(data_range > 0.0) || !std::isfinite(data_range)) {
    throw Error(ErrorCode::BadParams, "data_range must be positive");
  }
}

// Valid-mode separable filtering of an x-fastest field with the same 1D
// kernel along every axis.
Eigen::ArrayXd filter_valid(const Eigen::ArrayXd& in, const Dims& dims, const Eigen::ArrayXd& kernel) {
  const int taps = static_cast<int>(kernel.size());
  Eigen::ArrayXd cur = in;
  Dims d = dims;
  for (int axis = 0; axis < 3; ++axis) {
    Dims od = d;
    od[axis] -= taps - 1;
    const Index stride = axis == 0 ? 1 : axis == 1 ? d[0] : static_cast<Index>(d[0]) * d[1];
    Eigen::ArrayXd out(static_cast<Index>(od.prod()));
    Index o = 0;
    for (int z = 0; z < od[2]; ++z)
      for (int y = 0; y < od[1]; ++y)
        for (int x = 0; x < od[0]; ++x) {
          const Index base = x + static_cast<Index>(d[0]) * (y + static_cast<Index>(d[1]) * z);
          double acc = 0.0;
          for (int k = 0; k < taps; ++k) acc += kernel[k] * cur[base + k * stride];
          out[o++] = acc;
        }
    cur = std::move(out);
    d = od;
  }
  return cur;
}

void require_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "correlation inputs differ in length (" + std::to_string(x.size()) +
                                               " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) throw Error(ErrorCode::TooSmall, "correlation needs at least 3 pairs");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite)) {
    throw Error(ErrorCode::BadParams, "correlation inputs must be finite");
  }
}

double pearson_unchecked(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  const Eigen::ArrayXd cx = x - x.mean();
  const Eigen::ArrayXd cy = y - y.mean();
  const double sxx = cx.square().sum();
  const double syy = cy.square().sum();
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorCode::ConstantInput, "correlation input is constant");
  return std::clamp((cx * cy).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

Eigen::ArrayXd as_array(std::span<const double> x) {
  return Eigen::Map<const Eigen::ArrayXd>(x.data(), static_cast<Index>(x.size()));
}

}  // namespace

std::string MetricReport::to_json_line() const {
  nlohmann::ordered_json j;
  j["metric"] = metric;
  j["value"] = value;
  j["capped"] = capped;
  j["parameters"] = parameters;
  j["inputs"] = inputs;
  return j.dump();
}

MetricReport psnr(const VoxelVolume& a, const VoxelVolume& b, double data_range, std::vector<std::string> inputs) {
  require_same_dims(a.dims(), b.dims());
  require_range(data_range);
  const double mse = (a.data().cast<double>() - b.data().cast<double>()).square().mean();
  MetricReport r{"psnr", kPsnrCap, false, {{"data_range", data_range}}, std::move(inputs)};
  if (mse == 0.0) {
    r.capped = true;
  } else {
    r.value = 10.0 * std::log10(data_range * data_range / mse);
  }
  return r;
}

MetricReport ssim3d(const VoxelVolume& a, const VoxelVolume& b, const SsimOptions& options,
                    std::vector<std::string> inputs) {
  require_same_dims(a.dims(), b.dims());
  require_range(options.data_range);
  if (options.window < 1 || options.window % 2 == 0 || !(options.sigma > 0.0)) {
    throw Error(ErrorCode::BadParams, "SSIM window must be odd and sigma positive");
  }
  if ((a.dims() < options.window).any()) {
    throw Error(ErrorCode::TooSmall, "volume is smaller than the " + std::to_string(options.window) + "^3 SSIM window");
  }
  const int half = options.window / 2;
  Eigen::ArrayXd kernel(options.window);
  for (int i = -half; i <= half; ++i) kernel[i + half] = std::exp(-0.5 * i * i / (options.sigma * options.sigma));
  kernel /= kernel.sum();

  const Eigen::ArrayXd x = a.data().cast<double>();
  const Eigen::ArrayXd y = b.data().cast<double>();
  const Eigen::ArrayXd mx = filter_valid(x, a.dims(), kernel);
  const Eigen::ArrayXd my = filter_valid(y, a.dims(), kernel);
  const Eigen::ArrayXd sxx = filter_valid(x * x, a.dims(), kernel) - mx * mx;
  const Eigen::ArrayXd syy = filter_valid(y * y, a.dims(), kernel) - my * my;
  const Eigen::ArrayXd sxy = filter_valid(x * y, a.dims(), kernel) - mx * my;
  const double c1 = std::pow(options.k1 * options.data_range, 2);
  const double c2 = std::pow(options.k2 * options.data_range, 2);
  const Eigen::ArrayXd local = ((2.0 * (mx * my) + c1) * (2.0 * sxy + c2)) /
                               ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return {"ssim3d",
          local.mean(),
          false,
          {{"window", options.window},
           {"sigma", options.sigma},
           {"data_range", options.data_range},
           {"k1", options.k1},
           {"k2", options.k2}},
          std::move(inputs)};
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_pair(x, y);
  return pearson_unchecked(as_array(x), as_array(y));
}

Eigen::ArrayXd average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  Eigen::ArrayXd ranks(static_cast<Index>(x.size()));
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() && x[order[end]] == x[order[start]]) ++end;
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[static_cast<Index>(order[k])] = rank;
    start = end;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_pair(x, y);
  return pearson_unchecked(average_ranks(x), average_ranks(y));
}

CorrelationSummary correlate(std::span<const double> x, std::span<const double> y) {
  return {pearson(x, y), spearman(x, y)};
}

double dice(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a.dims(), b.dims());
  const Index na = foreground_count(a);
  const Index nb = foreground_count(b);
  if (na + nb == 0) return 1.0;
  const Index both = ((a.data() != 0) && (b.data() != 0)).count();
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

}  // namespace radsynth
