#include "radsynth/app/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json_fields.hpp"
#include "radsynth/metrics.hpp"
#include "radsynth/mvol.hpp"

namespace radsynth::app {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::TargetUnreachable: return 3;
    case ErrorCode::PortInUse: return 4;
    default: return 2;
  }
}

nlohmann::json error_json(const Error& e) {
  return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
}

std::string output_path(const RunConfig& config, const std::string& path) {
  const fs::path full = fs::path(config.output_dir) / path;
  if (full.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(full.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + full.parent_path().string() + ": " + ec.message());
  }
  return full.string();
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

void read_config_keys(JsonFields& f, RunConfig& c) {
  f.read("discretization", c.discretization);
  f.read("bins", c.bins);
  f.read("bin_width", c.bin_width);
  f.read("threads", c.threads);
  f.read("T", c.total_steps);
  f.read("s", c.variance_scale);
  f.read("steps", c.inference_steps);
  f.read("seed", c.seed);
}

// Seed offsets keep the shape, texture and host streams independent.
constexpr std::uint64_t kTextureStream = 1;
constexpr std::uint64_t kHostStream = 2;

}  // namespace

// --- extract -----------------------------------------------------------------

FeatureVector run_extract(const ExtractOptions& options, const RunConfig& config) {
  config.validate();
  std::string format = options.format;
  if (format.empty()) format = fs::path(options.out).extension() == ".json" ? "json" : "csv";
  if (format != "csv" && format != "json") throw Error(ErrorCode::BadParams, "format must be csv or json");
  const VoxelVolume v = read_volume(options.volume);
  const BinaryMask m = read_mask(options.mask);
  const FeatureVector fv = extract_all(v, m, config.extraction());
  if (!options.out.empty()) {
    write_text(output_path(config, options.out), format == "json" ? features_to_json(fv) : features_to_csv(fv));
  }
  return fv;
}

// --- phantom -----------------------------------------------------------------

PhantomOptions PhantomOptions::from_json(const nlohmann::json& j, RunConfig& config) {
  PhantomOptions o;
  JsonFields f(j, "phantom");
  f.read("volume_mm3", o.volume_mm3);
  f.read("sphericity", o.sphericity);
  f.read("corr_length", o.corr_length);
  f.read("grid", o.grid);
  f.read("spacing", o.spacing);
  f.read("axis_ratios", o.axis_ratios);
  f.read("lobulation", o.lobulation);
  f.read("degree", o.degree);
  f.read("mean", o.mean);
  f.read("std", o.std);
  f.read("skew", o.skew);
  f.read("blend_mm", o.blend_mm);
  read_config_keys(f, config);
  f.finish();
  config.validate();
  return o;
}

nlohmann::json PhantomOptions::to_json() const {
  nlohmann::ordered_json j;
  j["volume_mm3"] = volume_mm3;
  j["sphericity"] = sphericity ? nlohmann::ordered_json(*sphericity) : nlohmann::ordered_json(nullptr);
  j["corr_length"] = corr_length;
  j["grid"] = grid;
  j["spacing"] = spacing;
  j["axis_ratios"] = axis_ratios;
  j["lobulation"] = lobulation ? nlohmann::ordered_json(*lobulation) : nlohmann::ordered_json(nullptr);
  j["degree"] = degree;
  j["mean"] = mean;
  j["std"] = std;
  j["skew"] = skew;
  j["blend_mm"] = blend_mm;
  return j;
}

GridSpec PhantomOptions::grid_spec() const {
  GridSpec g{Dims(grid[0], grid[1], grid[2]), Spacing(spacing[0], spacing[1], spacing[2])};
  if ((g.dims < 1).any() || (g.dims > 1024).any()) throw Error(ErrorCode::BadParams, "grid dims must lie in 1..1024");
  if (!(g.spacing.array() > 0.0).all()) throw Error(ErrorCode::BadParams, "spacing must be positive");
  return g;
}

ShapeSpec PhantomOptions::shape_spec(std::uint64_t seed) const {
  ShapeSpec s;
  s.target_volume = volume_mm3;
  s.target_sphericity = sphericity;
  s.axis_ratios = Eigen::Vector3d(axis_ratios[0], axis_ratios[1], axis_ratios[2]);
  s.lobulation_amplitude = lobulation.value_or(sphericity ? 1.5 : 0.0);
  s.harmonic_degree = degree;
  s.seed = seed;
  return s;
}

TextureSpec PhantomOptions::texture_spec(std::uint64_t seed) const {
  return {mean, std, corr_length, skew, seed + kTextureStream};
}

Phantom make_phantom(const PhantomOptions& options, const RunConfig& config) {
  config.validate();
  const GridSpec grid = options.grid_spec();
  const TextureSpec texture_spec = options.texture_spec(config.seed);
  texture_spec.validate();
  GeneratedMask shape = generate_mask_report(options.shape_spec(config.seed), grid);
  const VoxelVolume texture = generate_texture(texture_spec, grid);
  const VoxelVolume host = generate_host(grid, config.seed + kHostStream);
  VoxelVolume volume = insert_tumor(host, shape.mask, texture, options.blend_mm);
  FeatureVector features = extract_all(volume, shape.mask, config.extraction());
  return {std::move(shape), std::move(volume), std::move(features)};
}

nlohmann::json run_phantom(const PhantomOptions& options, const RunConfig& config, const std::string& prefix) {
  const Phantom p = make_phantom(options, config);
  write_mvol(p.shape.mask, output_path(config, prefix + "mask.mvol"));
  write_mvol(p.volume, output_path(config, prefix + "tumor.mvol"));
  write_text(output_path(config, prefix + "features.csv"), features_to_csv(p.features));
  nlohmann::ordered_json summary;
  summary["seed"] = config.seed;
  summary["spec"] = options.to_json();
  summary["achieved"] = {{"volume_mm3", p.shape.volume},
                         {"sphericity", p.shape.sphericity},
                         {"lobulation", p.shape.amplitude},
                         {"radius_mm", p.shape.radius}};
  summary["files"] = {prefix + "mask.mvol", prefix + "tumor.mvol", prefix + "features.csv"};
  write_text(output_path(config, prefix + "phantom.json"), summary.dump(2) + "\n");
  return summary;
}

// --- bridge ------------------------------------------------------------------

BridgeRun simulate_bridge(const VoxelVolume& x0, const VoxelVolume& y, const BinaryMask* mask,
                          const BridgeOptions& options, const RunConfig& config,
                          const std::function<bool()>& cancel) {
  config.validate();
  require_same_geometry(x0, y);
  if (mask) require_same_geometry(x0, *mask);
  const BridgeSchedule sched(config.total_steps, config.variance_scale, config.inference_steps);
  for (int t : options.trace_at) {
    if (!sched.in_inference_subset(t)) {
      throw Error(ErrorCode::BadParams, "trace step " + std::to_string(t) + " is not an inference point");
    }
  }
  const SamplingOptions sampling{parse_sampling_mode(options.mode), config.seed};

  const BridgeField x0_field = x0.data().cast<double>();
  const BridgeField y_field = y.data().cast<double>();
  std::unique_ptr<Denoiser> denoiser;
  if (options.denoiser == "oracle") {
    denoiser = std::make_unique<OracleDenoiser>(x0_field, y_field, sched);
  } else if (options.denoiser == "zero") {
    denoiser = std::make_unique<ZeroDenoiser>();
  } else {
    throw Error(ErrorCode::BadParams, "denoiser must be 'oracle' or 'zero', not '" + options.denoiser + "'");
  }

  auto to_volume = [&](const BridgeField& x) {
    VoxelVolume::Storage data = x.cast<float>();
    if (mask) data = (mask->data() == 0).select(x0.data(), data);
    return VoxelVolume(x0.dims(), x0.spacing(), std::move(data));
  };
  std::vector<std::pair<int, VoxelVolume>> traces;
  const ChainObserver observer = [&](int t, const BridgeField& x) {
    if (cancel && cancel()) throw Error(ErrorCode::Cancelled, "bridge run cancelled at t = " + std::to_string(t));
    if (std::find(options.trace_at.begin(), options.trace_at.end(), t) != options.trace_at.end()) {
      traces.emplace_back(t, to_volume(x));
    }
  };
  VoxelVolume result = to_volume(sample_chain(y_field, *denoiser, nullptr, sampling, sched, observer));

  nlohmann::ordered_json manifest = nlohmann::ordered_json::parse(
      bridge_manifest_json(sched, sampling, 0, options.trace_at));
  manifest["denoiser"] = options.denoiser;
  manifest["masked"] = mask != nullptr;
  manifest["dims"] = {x0.dims()[0], x0.dims()[1], x0.dims()[2]};
  manifest["max_abs_error_vs_x0"] = (result.data().cast<double>() - x0_field).abs().maxCoeff();
  return {std::move(result), std::move(traces), manifest};
}

nlohmann::json run_bridge(const BridgeOptions& options, const RunConfig& config) {
  const VoxelVolume x0 = read_volume(options.x0);
  std::optional<BinaryMask> mask;
  if (!options.mask.empty()) mask = read_mask(options.mask);
  if (options.y.empty() && !mask) throw Error(ErrorCode::BadParams, "bridge needs --y or --mask");
  if (mask) require_same_geometry(x0, *mask);
  const VoxelVolume y = options.y.empty() ? apply_mask(x0, *mask, MaskMode::ZeroInside) : read_volume(options.y);
  if (!(options.window[1] > options.window[0])) throw Error(ErrorCode::BadParams, "window needs lo < hi");
  const BridgeRun run = simulate_bridge(x0, y, mask ? &*mask : nullptr, options, config);

  write_mvol(run.result, output_path(config, options.out + "/result.mvol"));
  nlohmann::ordered_json manifest = run.manifest;
  nlohmann::ordered_json traces = nlohmann::ordered_json::array();
  for (const auto& [t, v] : run.traces) {
    const std::string name = "trace_t" + std::to_string(t) + ".png";
    write_file_bytes(output_path(config, options.out + "/" + name),
                     encode_png(extract_slice(v, Axis::Z, v.dims()[2] / 2, options.window[0], options.window[1])));
    traces.push_back({{"t", t}, {"file", name}});
  }
  manifest["traces"] = traces;
  manifest["window"] = options.window;
  write_text(output_path(config, options.out + "/manifest.json"), manifest.dump(2) + "\n");
  return manifest;
}

// --- correlate ---------------------------------------------------------------

CorrelateOptions CorrelateOptions::from_json(const nlohmann::json& j, RunConfig& config) {
  CorrelateOptions o;
  JsonFields f(j, "sweep");
  f.read("sweep", o.sweep);
  f.read("parameter", o.parameter);
  f.read("points", o.points);
  read_config_keys(f, config);
  f.finish();
  config.validate();
  return o;
}

SweepDefinition default_sweep(const CorrelateOptions& options, const RunConfig& config) {
  SweepDefinition def;
  def.kind = parse_sweep_kind(options.sweep);
  def.seed = config.seed;
  def.threads = config.threads;
  const bool shape = def.kind == SweepKind::Shape;
  def.parameter = options.parameter.empty() ? (shape ? "volume" : "correlation_length") : options.parameter;
  const int points = options.points == 0 ? (shape ? 20 : 15) : options.points;
  if (points < 10) {
    throw Error(ErrorCode::BadParams, "a conditioning sweep needs at least 10 points (got " + std::to_string(points) + ")");
  }
  if (def.parameter == "volume") {
    def.targets = geometric_targets(500.0, 20000.0, points);
  } else if (def.parameter == "sphericity") {
    def.targets = linear_targets(0.6, 0.9, points);
    def.shape.target_volume = 6000.0;
    def.shape.lobulation_amplitude = 1.5;
    def.shape.harmonic_degree = 6;
  } else if (def.parameter == "correlation_length") {
    def.targets = linear_targets(0.0, 4.0, points);
  } else {
    throw Error(ErrorCode::BadParams, "unknown sweep parameter '" + def.parameter + "'");
  }
  if (shape != (def.parameter != "correlation_length")) {
    throw Error(ErrorCode::BadParams,
                "parameter '" + def.parameter + "' does not belong to a " + options.sweep + " sweep");
  }
  return def;
}

GridSpec default_sweep_grid(const CorrelateOptions& options) {
  return parse_sweep_kind(options.sweep) == SweepKind::Shape ? GridSpec{Dims::Constant(64), Spacing::Ones()}
                                                             : GridSpec{Dims::Constant(48), Spacing::Ones()};
}

nlohmann::json correlation_summary(const SweepDefinition& def, const SweepResult& result) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(def.kind);
  j["parameter"] = def.parameter;
  j["points"] = result.rows.size();
  j["seed"] = def.seed;
  const std::vector<double> target = result.target_column(0);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& name : result.achieved_names) {
    const std::vector<double> achieved = result.achieved_column(name);
    nlohmann::ordered_json row;
    row["target"] = def.parameter;
    row["achieved"] = name;
    try {
      const CorrelationSummary c = radsynth::correlate(target, achieved);
      row["pearson"] = c.pearson;
      row["spearman"] = c.spearman;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConstantInput) throw;
      row["pearson"] = nullptr;
      row["spearman"] = nullptr;
    }
    rows.push_back(row);
  }
  j["correlations"] = rows;
  return j;
}

CorrelationRun correlation_sweep(const CorrelateOptions& options, const RunConfig& config) {
  config.validate();
  CorrelationRun run{default_sweep(options, config), default_sweep_grid(options), {}, {}};
  run.result = run_conditioning_sweep(run.definition, run.grid, config.extraction());
  run.summary = correlation_summary(run.definition, run.result);
  return run;
}

nlohmann::json run_correlate(const CorrelateOptions& options, const RunConfig& config) {
  const CorrelationRun run = correlation_sweep(options, config);
  write_text(output_path(config, options.out + ".csv"), sweep_to_csv(run.result));
  write_text(output_path(config, options.out + "_summary.json"), run.summary.dump(2) + "\n");
  write_text(output_path(config, options.out + "_manifest.json"),
             sweep_manifest_json(run.definition, run.grid, run.result) + "\n");
  return run.summary;
}

}  // namespace radsynth::app
