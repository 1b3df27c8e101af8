#include "radsynth/app/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "json_fields.hpp"

namespace radsynth::app {

void RunConfig::validate() const {
  if (discretization != "count" && discretization != "width") {
    throw Error(ErrorCode::BadParams, "discretization must be 'count' or 'width', not '" + discretization + "'");
  }
  if (discretization == "count" && bins < 2) throw Error(ErrorCode::BadParams, "bins must be >= 2");
  if (discretization == "width" && !(bin_width > 0.0)) throw Error(ErrorCode::BadParams, "bin_width must be > 0");
  if (threads < 1) throw Error(ErrorCode::BadParams, "threads must be >= 1");
  if (total_steps < 2) throw Error(ErrorCode::BadParams, "T must be >= 2");
  if (!(variance_scale > 0.0)) throw Error(ErrorCode::BadParams, "s must be > 0");
  if (inference_steps && (*inference_steps < 1 || *inference_steps > total_steps)) {
    throw Error(ErrorCode::BadParams, "steps must lie in 1..T (got " + std::to_string(*inference_steps) + " with T = " +
                                          std::to_string(total_steps) + ")");
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::BadParams, "port must lie in 0..65535");
}

ExtractionConfig RunConfig::extraction() const {
  ExtractionConfig config;
  if (discretization == "width") {
    config.discretization = FixedBinWidth{bin_width};
  } else {
    config.discretization = FixedBinCount{bins};
  }
  config.threads = threads;
  return config;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  JsonFields f(j, "config");
  f.read("discretization", c.discretization);
  f.read("bins", c.bins);
  f.read("bin_width", c.bin_width);
  f.read("threads", c.threads);
  f.read("T", c.total_steps);
  f.read("s", c.variance_scale);
  f.read("steps", c.inference_steps);
  f.read("seed", c.seed);
  f.read("output_dir", c.output_dir);
  f.read("port", c.port);
  f.finish();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadParams, "config " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

}  // namespace radsynth::app
