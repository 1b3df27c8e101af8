#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radsynth/app/config.hpp"
#include "radsynth/bridge.hpp"
#include "radsynth/phantom.hpp"

namespace radsynth::app {

/// 3 for TargetUnreachable, 4 for PortInUse, 2 for every other error.
int exit_code_for(ErrorCode code);
/// {"code": ..., "message": ...}
nlohmann::json error_json(const Error& e);

/// `config.output_dir / path`, with missing parent directories created.
std::string output_path(const RunConfig& config, const std::string& path);

// --- extract -----------------------------------------------------------------

struct ExtractOptions {
  std::string volume;
  std::string mask;
  std::string out;
  /// "csv" or "json"; empty picks by the extension of `out`.
  std::string format;
};

FeatureVector run_extract(const ExtractOptions& options, const RunConfig& config);

// --- phantom -----------------------------------------------------------------

struct PhantomOptions {
  double volume_mm3 = 4188.79;
  std::optional<double> sphericity;
  double corr_length = 2.0;
  std::array<int, 3> grid{96, 96, 96};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<double, 3> axis_ratios{1.0, 1.0, 1.0};
  /// Defaults to 0, or to 1.5 when a sphericity target needs room to move.
  std::optional<double> lobulation;
  int degree = 6;
  double mean = 0.6;
  double std = 0.08;
  double skew = 0.0;
  double blend_mm = 1.0;

  /// Reads the phantom keys (the flag names with '-' replaced by '_') plus
  /// the RunConfig keys into `config`. Unknown keys throw UnknownKey.
  static PhantomOptions from_json(const nlohmann::json& j, RunConfig& config);
  nlohmann::json to_json() const;

  GridSpec grid_spec() const;
  ShapeSpec shape_spec(std::uint64_t seed) const;
  TextureSpec texture_spec(std::uint64_t seed) const;
};

struct Phantom {
  GeneratedMask shape;
  /// Host background with the textured tumor inserted under the mask.
  VoxelVolume volume;
  FeatureVector features;
};

Phantom make_phantom(const PhantomOptions& options, const RunConfig& config);

/// Writes `<prefix>mask.mvol`, `<prefix>tumor.mvol`, `<prefix>features.csv`
/// and `<prefix>phantom.json`; returns the JSON summary.
nlohmann::json run_phantom(const PhantomOptions& options, const RunConfig& config, const std::string& prefix);

// --- bridge ------------------------------------------------------------------

struct BridgeOptions {
  std::string x0;
  /// Masked input. When empty, `mask` must be given and y = x0 with the
  /// mask blanked; the result is then composited outside the mask.
  std::string y;
  std::string mask;
  std::string mode = "deterministic";
  std::string denoiser = "oracle";
  std::vector<int> trace_at;
  std::array<double, 2> window{0.0, 1.0};
  std::string out = "bridge";
};

struct BridgeRun {
  VoxelVolume result;
  std::vector<std::pair<int, VoxelVolume>> traces;  // in the order visited
  nlohmann::json manifest;
};

/// Runs the reverse chain on already loaded volumes. `cancel` is polled
/// between steps and aborts with Cancelled.
BridgeRun simulate_bridge(const VoxelVolume& x0, const VoxelVolume& y, const BinaryMask* mask,
                          const BridgeOptions& options, const RunConfig& config,
                          const std::function<bool()>& cancel = {});

/// Writes `<out>/result.mvol`, `<out>/trace_t<t>.png` (axial mid slice) and
/// `<out>/manifest.json`; returns the manifest.
nlohmann::json run_bridge(const BridgeOptions& options, const RunConfig& config);

// --- correlate ---------------------------------------------------------------

struct CorrelateOptions {
  std::string sweep = "shape";
  /// Empty picks "volume" for shape sweeps, "correlation_length" for texture.
  std::string parameter;
  /// 0 picks 20 for shape sweeps and 15 for texture sweeps.
  int points = 0;
  std::string out = "sweep";

  static CorrelateOptions from_json(const nlohmann::json& j, RunConfig& config);
};

/// The built-in sweep for a kind and parameter: volume 500..20000 mm^3
/// (geometric), sphericity 0.6..0.9, correlation length 0..4 mm.
SweepDefinition default_sweep(const CorrelateOptions& options, const RunConfig& config);
GridSpec default_sweep_grid(const CorrelateOptions& options);

/// {kind, parameter, points, seed, correlations: [{target, achieved, pearson,
/// spearman}...]}; the first entry pairs the target with its own measure.
nlohmann::json correlation_summary(const SweepDefinition& def, const SweepResult& result);

struct CorrelationRun {
  SweepDefinition definition;
  GridSpec grid;
  SweepResult result;
  nlohmann::json summary;
};
CorrelationRun correlation_sweep(const CorrelateOptions& options, const RunConfig& config);

/// Writes `<out>.csv`, `<out>_summary.json` and `<out>_manifest.json`;
/// returns the summary.
nlohmann::json run_correlate(const CorrelateOptions& options, const RunConfig& config);

}  // namespace radsynth::app
