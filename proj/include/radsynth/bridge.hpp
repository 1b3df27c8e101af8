#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "radsynth/error.hpp"
#include "radsynth/radiomics/features.hpp"
#include "radsynth/volume.hpp"

namespace radsynth {

/// Value grid carried through the bridge, flattened x-fastest.
using BridgeField = Eigen::ArrayXd;

/// What a denoiser returns for x_t.
///  - BridgeTarget: m_t (y - x_0) + sqrt(delta_t) eps, the training target;
///    equal to x_t - x_0, so it is well defined at both endpoints.
///  - Noise: eps itself; x_0 cannot be recovered from it at t = T.
enum class Prediction { BridgeTarget, Noise };

enum class SamplingMode { Stochastic, Deterministic };

struct PosteriorCoefficients {
  double c_x = 0.0;
  double c_y = 0.0;
  double c_eps = 0.0;
  double delta_tilde = 0.0;
};

/// One sampling transition t_from -> t_to with t_to < t_from.
struct Transition {
  int t_from = 0;
  int t_to = 0;
  PosteriorCoefficients coefficients;  // BridgeTarget parameterization
};

/// m_t = t / T and delta_t = 2 s m_t (1 - m_t) on the grid 0..T, plus the
/// inference subset and its transition table.
class BridgeSchedule {
 public:
  /// `inference_steps` subsamples {0..T} with a uniform stride; both ends
  /// are always kept. Throws BadParams.
  explicit BridgeSchedule(int total_steps, double variance_scale = 1.0,
                          std::optional<int> inference_steps = std::nullopt);

  int total_steps() const { return total_steps_; }
  double variance_scale() const { return variance_scale_; }
  int inference_steps() const { return static_cast<int>(points_.size()) - 1; }

  double m(int t) const;
  double delta(int t) const;

  /// Ascending, starts at 0 and ends at T.
  const std::vector<int>& inference_points() const { return points_; }
  bool in_inference_subset(int t) const;
  /// Predecessor of t in the inference subset. Throws BadStepPair at t = 0.
  int previous(int t) const;

  /// Descending in t_from.
  const std::vector<Transition>& transitions() const { return transitions_; }

 private:
  int total_steps_;
  double variance_scale_;
  std::vector<int> points_;
  std::vector<Transition> transitions_;
};

/// Gaussian-posterior coefficients of x_{t_to} given x_{t_from}, y and the
/// denoiser output. The mean is c_x x_{t_from} + c_y y + c_eps eps_hat and
/// the variance delta_tilde; c_eps is negative under this sign convention.
/// Throws BadStepPair unless t_to < t_from, both lie in the inference subset,
/// and (for Noise) t_from < T.
PosteriorCoefficients posterior_coefficients(const BridgeSchedule& sched, int t_from, int t_to,
                                             Prediction prediction = Prediction::BridgeTarget);

namespace detail {

template <typename A, typename B>
void require_same_size(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::ShapeMismatch, "bridge fields differ in size (" + std::to_string(a.size()) +
                                              " vs " + std::to_string(b.size()) + ")");
  }
}

inline void require_step(const BridgeSchedule& sched, int t) {
  if (t < 0 || t > sched.total_steps()) {
    throw Error(ErrorCode::BadStepPair, "step " + std::to_string(t) + " outside 0.." +
                                            std::to_string(sched.total_steps()));
  }
}

}  // namespace detail

/// x_t = (1 - m_t) x_0 + m_t y + sqrt(delta_t) eps.
template <typename X0, typename Y, typename Eps>
Eigen::Array<typename X0::Scalar, Eigen::Dynamic, 1> forward_sample(
    const Eigen::ArrayBase<X0>& x0, const Eigen::ArrayBase<Y>& y, int t,
    const Eigen::ArrayBase<Eps>& eps, const BridgeSchedule& sched) {
  detail::require_same_size(x0, y);
  detail::require_same_size(x0, eps);
  detail::require_step(sched, t);
  using Scalar = typename X0::Scalar;
  const auto m = static_cast<Scalar>(sched.m(t));
  const auto sd = static_cast<Scalar>(std::sqrt(sched.delta(t)));
  return (Scalar(1) - m) * x0 + m * y + sd * eps;
}

template <typename Scalar>
struct TrainingSample {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> x_t;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> target;
  double weight = 0.0;
};

/// Forward sample plus the regression target m_t (y - x_0) + sqrt(delta_t) eps.
/// The weight is -c_eps of the t -> t-1 transition (positive). Requires
/// 0 < t <= T.
template <typename X0, typename Y, typename Eps>
TrainingSample<typename X0::Scalar> training_target(const Eigen::ArrayBase<X0>& x0,
                                                    const Eigen::ArrayBase<Y>& y, int t,
                                                    const Eigen::ArrayBase<Eps>& eps,
                                                    const BridgeSchedule& sched) {
  detail::require_step(sched, t);
  if (t == 0) throw Error(ErrorCode::BadStepPair, "training target needs t > 0");
  using Scalar = typename X0::Scalar;
  TrainingSample<Scalar> out;
  out.x_t = forward_sample(x0, y, t, eps, sched);
  const auto m = static_cast<Scalar>(sched.m(t));
  const auto sd = static_cast<Scalar>(std::sqrt(sched.delta(t)));
  out.target = m * (y - x0) + sd * eps;
  const BridgeSchedule full(sched.total_steps(), sched.variance_scale());
  out.weight = -posterior_coefficients(full, t, t - 1).c_eps;
  return out;
}

/// Posterior mean c_x x_t + c_y y + c_eps eps_hat.
template <typename Xt, typename Y, typename E>
Eigen::Array<typename Xt::Scalar, Eigen::Dynamic, 1> posterior_mean(
    const PosteriorCoefficients& c, const Eigen::ArrayBase<Xt>& x_t, const Eigen::ArrayBase<Y>& y,
    const Eigen::ArrayBase<E>& eps_hat) {
  detail::require_same_size(x_t, y);
  detail::require_same_size(x_t, eps_hat);
  using Scalar = typename Xt::Scalar;
  return static_cast<Scalar>(c.c_x) * x_t + static_cast<Scalar>(c.c_y) * y +
         static_cast<Scalar>(c.c_eps) * eps_hat;
}

// --- denoisers --------------------------------------------------------------

/// eps_theta(x_t, t, condition?). The condition pointer is null when the
/// unconditional path is requested.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Prediction prediction() const = 0;
  virtual BridgeField operator()(const BridgeField& x_t, int t,
                                 const ConditioningVector* condition) const = 0;
};

/// Predicts exactly from the known clean field by inverting the forward
/// process. With Noise prediction it throws DivisionAtEndpoint at t = 0, T.
class OracleDenoiser final : public Denoiser {
 public:
  OracleDenoiser(BridgeField x0, BridgeField y, const BridgeSchedule& sched,
                 Prediction prediction = Prediction::BridgeTarget);

  Prediction prediction() const override { return prediction_; }
  BridgeField operator()(const BridgeField& x_t, int t,
                         const ConditioningVector* condition) const override;

 private:
  BridgeField x0_;
  BridgeField y_;
  BridgeSchedule sched_;
  Prediction prediction_;
};

/// Always predicts zero.
class ZeroDenoiser final : public Denoiser {
 public:
  explicit ZeroDenoiser(Prediction prediction = Prediction::BridgeTarget) : prediction_(prediction) {}
  Prediction prediction() const override { return prediction_; }
  BridgeField operator()(const BridgeField& x_t, int, const ConditioningVector*) const override {
    return BridgeField::Zero(x_t.size());
  }

 private:
  Prediction prediction_;
};

// --- reverse process --------------------------------------------------------

struct BridgeState {
  BridgeField x;
  int t = 0;
};

/// One transition from state.t to its predecessor in the inference subset:
/// mean + sqrt(delta_tilde) z when stochastic, the mean alone otherwise. The
/// condition is passed to the denoiser only when present.
BridgeState reverse_step(const BridgeState& state, const BridgeField& y, const Denoiser& denoiser,
                         const ConditioningVector* condition, const BridgeField& z,
                         SamplingMode mode, const BridgeSchedule& sched);

struct SamplingOptions {
  SamplingMode mode = SamplingMode::Stochastic;
  std::uint64_t seed = 0;
};

/// Called with (t, x_t) at every inference point, from T down to 0.
using ChainObserver = std::function<void(int, const BridgeField&)>;

/// Starts at x_T = y and walks the inference subset down to 0.
BridgeField sample_chain(const BridgeField& y, const Denoiser& denoiser,
                         const ConditioningVector* condition, const SamplingOptions& opts,
                         const BridgeSchedule& sched, const ChainObserver& observer = {});

// --- codecs -----------------------------------------------------------------

struct Latent {
  Dims dims;
  BridgeField data;
};

class Codec {
 public:
  virtual ~Codec() = default;
  virtual int factor() const = 0;
  virtual Latent encode(const VoxelVolume& v) const = 0;
  /// `like` supplies the voxel grid geometry of the output.
  virtual VoxelVolume decode(const Latent& z, const VoxelVolume& like) const = 0;
};

class IdentityCodec final : public Codec {
 public:
  int factor() const override { return 1; }
  Latent encode(const VoxelVolume& v) const override;
  VoxelVolume decode(const Latent& z, const VoxelVolume& like) const override;
};

/// Averages f^3 blocks; decoding repeats each latent value over its block.
/// Every dimension must be divisible by f.
class PoolingCodec final : public Codec {
 public:
  explicit PoolingCodec(int factor);
  int factor() const override { return factor_; }
  Latent encode(const VoxelVolume& v) const override;
  VoxelVolume decode(const Latent& z, const VoxelVolume& like) const override;

 private:
  int factor_;
};

// --- masked synthesis -------------------------------------------------------

/// Removes whatever is under the mask: the chain runs from the encoded,
/// zero-inside masked volume without a condition, and voxels outside the mask
/// are copied from `v`.
VoxelVolume sample_normal(const VoxelVolume& v, const BinaryMask& m, const Codec& codec,
                          const Denoiser& denoiser, const SamplingOptions& opts,
                          const BridgeSchedule& sched, const ChainObserver& observer = {});

/// As sample_normal, with the texture vector r_tx forwarded to every
/// denoiser call. Throws WrongLength unless r_tx holds 74 texture values.
VoxelVolume sample_tumor(const VoxelVolume& v, const BinaryMask& m, const ConditioningVector& r_tx,
                         const Codec& codec, const Denoiser& denoiser, const SamplingOptions& opts,
                         const BridgeSchedule& sched, const ChainObserver& observer = {});

/// Masked input of the synthesis chains in latent space.
Latent masked_latent(const VoxelVolume& v, const BinaryMask& m, const Codec& codec);

/// {T, s, steps, seed, mode, condition_length} as JSON.
std::string bridge_manifest_json(const BridgeSchedule& sched, const SamplingOptions& opts,
                                 std::size_t condition_length, const std::vector<int>& trace_at = {});

SamplingMode parse_sampling_mode(const std::string& name);
std::string_view to_string(SamplingMode mode);

}  // namespace radsynth
