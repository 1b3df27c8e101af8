#include "radsynth/bridge.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "radsynth/random.hpp"

namespace radsynth {

BridgeSchedule::BridgeSchedule(int total_steps, double variance_scale, std::optional<int> inference_steps)
    : total_steps_(total_steps), variance_scale_(variance_scale) {
  if (total_steps < 2) throw Error(ErrorCode::BadParams, "bridge needs T >= 2");
  if (!(variance_scale > 0.0) || !std::isfinite(variance_scale)) {
    throw Error(ErrorCode::BadParams, "variance scale s must be positive");
  }
  const int n = inference_steps.value_or(total_steps);
  if (n < 1 || n > total_steps) {
    throw Error(ErrorCode::BadParams, "inference steps must lie in 1..T (got " + std::to_string(n) + ")");
  }
  points_.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    points_.push_back(static_cast<int>(static_cast<std::int64_t>(k) * total_steps / n));
  }
  for (auto it = points_.rbegin(); it + 1 != points_.rend(); ++it) {
    transitions_.push_back({*it, *(it + 1), posterior_coefficients(*this, *it, *(it + 1))});
  }
}

double BridgeSchedule::m(int t) const {
  detail::require_step(*this, t);
  return static_cast<double>(t) / total_steps_;
}

double BridgeSchedule::delta(int t) const {
  const double mt = m(t);
  return 2.0 * variance_scale_ * mt * (1.0 - mt);
}

bool BridgeSchedule::in_inference_subset(int t) const {
  return std::binary_search(points_.begin(), points_.end(), t);
}

int BridgeSchedule::previous(int t) const {
  const auto it = std::lower_bound(points_.begin(), points_.end(), t);
  if (it == points_.end() || *it != t || it == points_.begin()) {
    throw Error(ErrorCode::BadStepPair, "step " + std::to_string(t) + " has no predecessor in the inference subset");
  }
  return *(it - 1);
}

PosteriorCoefficients posterior_coefficients(const BridgeSchedule& sched, int t_from, int t_to,
                                             Prediction prediction) {
  if (!(t_to < t_from) || !sched.in_inference_subset(t_from) || !sched.in_inference_subset(t_to)) {
    throw Error(ErrorCode::BadStepPair, "invalid transition " + std::to_string(t_from) + " -> " +
                                            std::to_string(t_to));
  }
  const double s = sched.variance_scale();
  const double mt = sched.m(t_from), ms = sched.m(t_to);
  // x_t | x_s = a x_s + b y + N(0, delta_t - a^2 delta_s); conditioning on x_0
  // gives the mean k1 mu_s(x_0) + k2 (x_t - b y) with the ratios below.
  const double a = (1.0 - mt) / (1.0 - ms);
  const double b = mt - a * ms;
  const double k1 = (mt - ms) / (mt * (1.0 - ms));
  const double k2 = ms / mt;

  PosteriorCoefficients c;
  c.delta_tilde = 2.0 * s * ms * (mt - ms) / mt;
  if (prediction == Prediction::BridgeTarget) {
    // x0_hat = x_t - eps_hat
    c.c_x = k1 * (1.0 - ms) + k2;
    c.c_y = k1 * ms - k2 * b;
    c.c_eps = -k1 * (1.0 - ms);
  } else {
    if (t_from == sched.total_steps()) {
      throw Error(ErrorCode::BadStepPair, "noise prediction cannot recover x_0 at t = T");
    }
    // x0_hat = (x_t - m_t y - sqrt(delta_t) eps_hat) / (1 - m_t)
    const double g = k1 * (1.0 - ms) / (1.0 - mt);
    c.c_x = k2 + g;
    c.c_y = k1 * ms - k2 * b - g * mt;
    c.c_eps = -g * std::sqrt(sched.delta(t_from));
  }
  return c;
}

OracleDenoiser::OracleDenoiser(BridgeField x0, BridgeField y, const BridgeSchedule& sched,
                               Prediction prediction)
    : x0_(std::move(x0)), y_(std::move(y)), sched_(sched), prediction_(prediction) {
  detail::require_same_size(x0_, y_);
}

BridgeField OracleDenoiser::operator()(const BridgeField& x_t, int t, const ConditioningVector*) const {
  detail::require_same_size(x_t, x0_);
  detail::require_step(sched_, t);
  if (prediction_ == Prediction::BridgeTarget) return x_t - x0_;
  if (t == 0 || t == sched_.total_steps()) {
    throw Error(ErrorCode::DivisionAtEndpoint, "noise oracle is undefined at t = " + std::to_string(t));
  }
  const double m = sched_.m(t);
  return (x_t - (1.0 - m) * x0_ - m * y_) / std::sqrt(sched_.delta(t));
}

BridgeState reverse_step(const BridgeState& state, const BridgeField& y, const Denoiser& denoiser,
                         const ConditioningVector* condition, const BridgeField& z,
                         SamplingMode mode, const BridgeSchedule& sched) {
  const int t_to = sched.previous(state.t);
  const auto c = posterior_coefficients(sched, state.t, t_to, denoiser.prediction());
  const BridgeField eps_hat = denoiser(state.x, state.t, condition);
  if (eps_hat.size() != state.x.size()) {
    throw Error(ErrorCode::ShapeMismatch, "denoiser output size differs from its input");
  }
  BridgeState out{posterior_mean(c, state.x, y, eps_hat), t_to};
  if (mode == SamplingMode::Stochastic && c.delta_tilde > 0.0) {
    detail::require_same_size(state.x, z);
    out.x += std::sqrt(c.delta_tilde) * z;
  }
  return out;
}

BridgeField sample_chain(const BridgeField& y, const Denoiser& denoiser,
                         const ConditioningVector* condition, const SamplingOptions& opts,
                         const BridgeSchedule& sched, const ChainObserver& observer) {
  Rng rng(opts.seed);
  BridgeState state{y, sched.total_steps()};
  if (observer) observer(state.t, state.x);
  BridgeField z = BridgeField::Zero(y.size());
  while (state.t > 0) {
    if (opts.mode == SamplingMode::Stochastic) {
      for (Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    }
    state = reverse_step(state, y, denoiser, condition, z, opts.mode, sched);
    if (observer) observer(state.t, state.x);
  }
  return state.x;
}

Latent IdentityCodec::encode(const VoxelVolume& v) const {
  return {v.dims(), v.data().cast<double>()};
}

VoxelVolume IdentityCodec::decode(const Latent& z, const VoxelVolume& like) const {
  if (!(z.dims == like.dims()).all()) throw Error(ErrorCode::ShapeMismatch, "latent dims differ from target grid");
  return VoxelVolume(like.dims(), like.spacing(), z.data.cast<float>());
}

PoolingCodec::PoolingCodec(int factor) : factor_(factor) {
  if (factor < 1) throw Error(ErrorCode::BadParams, "pooling factor must be >= 1");
}

Latent PoolingCodec::encode(const VoxelVolume& v) const {
  const Dims& d = v.dims();
  if (((d / factor_) * factor_ != d).any()) {
    throw Error(ErrorCode::BadParams, "grid dims must be divisible by the pooling factor " + std::to_string(factor_));
  }
  Latent z{d / factor_, BridgeField::Zero(static_cast<Index>((d / factor_).prod()))};
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i) {
        const Index cell = i / factor_ + static_cast<Index>(z.dims[0]) * (j / factor_ + static_cast<Index>(z.dims[1]) * (k / factor_));
        z.data[cell] += v(i, j, k);
      }
  z.data /= static_cast<double>(factor_) * factor_ * factor_;
  return z;
}

VoxelVolume PoolingCodec::decode(const Latent& z, const VoxelVolume& like) const {
  const Dims& d = like.dims();
  if (!(z.dims * factor_ == d).all()) throw Error(ErrorCode::ShapeMismatch, "latent dims differ from target grid / f");
  VoxelVolume::Storage out(like.voxel_count());
  Index n = 0;
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i) {
        out[n++] = static_cast<float>(
            z.data[i / factor_ + static_cast<Index>(z.dims[0]) * (j / factor_ + static_cast<Index>(z.dims[1]) * (k / factor_))]);
      }
  return VoxelVolume(d, like.spacing(), std::move(out));
}

Latent masked_latent(const VoxelVolume& v, const BinaryMask& m, const Codec& codec) {
  return codec.encode(apply_mask(v, m, MaskMode::ZeroInside));
}

namespace {

VoxelVolume run_masked(const VoxelVolume& v, const BinaryMask& m, const ConditioningVector* condition,
                       const Codec& codec, const Denoiser& denoiser, const SamplingOptions& opts,
                       const BridgeSchedule& sched, const ChainObserver& observer) {
  require_same_geometry(v, m);
  const Latent y = masked_latent(v, m, codec);
  const BridgeField x0 = sample_chain(y.data, denoiser, condition, opts, sched, observer);
  const VoxelVolume decoded = codec.decode({y.dims, x0}, v);
  return VoxelVolume(v.dims(), v.spacing(),
                     (m.data() == 0).select(v.data(), decoded.data()));
}

}  // namespace

VoxelVolume sample_normal(const VoxelVolume& v, const BinaryMask& m, const Codec& codec,
                          const Denoiser& denoiser, const SamplingOptions& opts,
                          const BridgeSchedule& sched, const ChainObserver& observer) {
  return run_masked(v, m, nullptr, codec, denoiser, opts, sched, observer);
}

VoxelVolume sample_tumor(const VoxelVolume& v, const BinaryMask& m, const ConditioningVector& r_tx,
                         const Codec& codec, const Denoiser& denoiser, const SamplingOptions& opts,
                         const BridgeSchedule& sched, const ChainObserver& observer) {
  if (r_tx.kind != ConditioningKind::Texture) {
    throw Error(ErrorCode::WrongLength, "tumor sampling needs the 74-entry texture vector r_tx");
  }
  r_tx.validate();
  return run_masked(v, m, &r_tx, codec, denoiser, opts, sched, observer);
}

std::string bridge_manifest_json(const BridgeSchedule& sched, const SamplingOptions& opts,
                                 std::size_t condition_length, const std::vector<int>& trace_at) {
  nlohmann::ordered_json j;
  j["T"] = sched.total_steps();
  j["s"] = sched.variance_scale();
  j["steps"] = sched.inference_steps();
  j["seed"] = opts.seed;
  j["mode"] = to_string(opts.mode);
  j["condition_length"] = condition_length;
  if (!trace_at.empty()) j["trace_at"] = trace_at;
  return j.dump(2);
}

SamplingMode parse_sampling_mode(const std::string& name) {
  if (name == "stochastic") return SamplingMode::Stochastic;
  if (name == "deterministic") return SamplingMode::Deterministic;
  throw Error(ErrorCode::BadParams, "unknown sampling mode '" + name + "'");
}

std::string_view to_string(SamplingMode mode) {
  return mode == SamplingMode::Stochastic ? "stochastic" : "deterministic";
}

}  // namespace radsynth
