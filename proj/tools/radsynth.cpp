#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "radsynth/app/commands.hpp"
#include "radsynth/app/server.hpp"

using namespace radsynth;
using namespace radsynth::app;

namespace {

struct Flags {
  std::string config_path;
  RunConfig config;
  ExtractOptions extract;
  PhantomOptions phantom;
  std::string phantom_prefix = "phantom_";
  std::vector<int> grid;
  std::vector<double> spacing;
  std::vector<double> axis_ratios;
  double sphericity = 0.0;
  double lobulation = 0.0;
  BridgeOptions bridge;
  std::vector<double> window;
  int steps = 0;
  CorrelateOptions correlate;
  ServiceOptions serve;
  std::string store_dir;
  std::string ui_dir;
};

// Config-file values are the baseline; only flags that were actually given
// replace them.
struct Overrides {
  std::vector<std::function<void(RunConfig&)>> apply;

  template <typename T>
  void add(CLI::Option* opt, const T& value, T RunConfig::*field) {
    apply.push_back([opt, &value, field](RunConfig& c) {
      if (opt->count()) c.*field = value;
    });
  }
};

std::array<int, 3> expand3(const std::vector<int>& v) {
  if (v.size() == 1) return {v[0], v[0], v[0]};
  return {v[0], v[1], v[2]};
}

std::array<double, 3> expand3(const std::vector<double>& v) {
  if (v.size() == 1) return {v[0], v[0], v[0]};
  return {v[0], v[1], v[2]};
}

void add_extraction_flags(CLI::App* cmd, Flags& f, Overrides& o) {
  o.add(cmd->add_option("--bins", f.config.bins, "fixed bin count"), f.config.bins, &RunConfig::bins);
  auto* width = cmd->add_option("--bin-width", f.config.bin_width, "fixed bin width (switches the rule)");
  o.apply.push_back([width, &f](RunConfig& c) {
    if (width->count()) {
      c.bin_width = f.config.bin_width;
      c.discretization = "width";
    }
  });
  o.add(cmd->add_option("--threads", f.config.threads, "worker threads"), f.config.threads, &RunConfig::threads);
}

int serve(Flags& f, const RunConfig& config) {
  f.serve.config = config;
  if (!f.store_dir.empty()) f.serve.store_dir = f.store_dir;
  if (!f.ui_dir.empty()) f.serve.ui_dir = f.ui_dir;
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(f.serve);
  const int port = service.bind();
  std::cout << "{\"listening\": " << port << "}" << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.run();
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radiomics feature extraction, tumor phantoms and bridge simulation"};
  app.require_subcommand(1);
  Flags f;
  Overrides o;
  app.add_option("--config", f.config_path, "RunConfig JSON file");

  auto* extract = app.add_subcommand("extract", "extract the 90 features of a volume/mask pair");
  extract->add_option("--volume", f.extract.volume, "MVOL volume")->required();
  extract->add_option("--mask", f.extract.mask, "MVOL mask")->required();
  extract->add_option("--out", f.extract.out, "output file (.csv or .json)")->required();
  extract->add_option("--format", f.extract.format, "csv or json (default from --out)");
  add_extraction_flags(extract, f, o);

  auto* phantom = app.add_subcommand("phantom", "generate a tumor phantom and its features");
  phantom->add_option("--volume-mm3", f.phantom.volume_mm3, "target mesh volume");
  auto* sph = phantom->add_option("--sphericity", f.sphericity, "target sphericity");
  phantom->add_option("--corr-length", f.phantom.corr_length, "texture correlation length, mm");
  phantom->add_option("--grid", f.grid, "grid dims, one value or three")->delimiter(',')->expected(1, 3);
  phantom->add_option("--spacing", f.spacing, "voxel spacing, mm")->delimiter(',')->expected(1, 3);
  phantom->add_option("--axis-ratios", f.axis_ratios, "a,b,c")->delimiter(',')->expected(3);
  auto* lob = phantom->add_option("--lobulation", f.lobulation, "maximum lobulation amplitude");
  phantom->add_option("--degree", f.phantom.degree, "harmonic degree 2..6");
  phantom->add_option("--mean", f.phantom.mean, "texture mean");
  phantom->add_option("--std", f.phantom.std, "texture standard deviation");
  phantom->add_option("--skew", f.phantom.skew, "histogram skew knob in [-1, 1]");
  phantom->add_option("--blend-mm", f.phantom.blend_mm, "insertion cross-fade margin");
  phantom->add_option("--out", f.phantom_prefix, "output prefix");
  o.add(phantom->add_option("--seed", f.config.seed, "seed"), f.config.seed, &RunConfig::seed);
  add_extraction_flags(phantom, f, o);

  auto* bridge = app.add_subcommand("bridge", "run the reverse bridge chain");
  bridge->add_option("--x0", f.bridge.x0, "clean volume")->required();
  bridge->add_option("--y", f.bridge.y, "masked input volume");
  bridge->add_option("--mask", f.bridge.mask, "mask; builds y from x0 when --y is absent");
  o.add(bridge->add_option("--T", f.config.total_steps, "training steps"), f.config.total_steps, &RunConfig::total_steps);
  auto* steps = bridge->add_option("--steps", f.steps, "inference steps");
  o.apply.push_back([steps, &f](RunConfig& c) {
    if (steps->count()) c.inference_steps = f.steps;
  });
  o.add(bridge->add_option("--s", f.config.variance_scale, "variance scale"), f.config.variance_scale,
        &RunConfig::variance_scale);
  bridge->add_option("--mode", f.bridge.mode, "stochastic or deterministic");
  bridge->add_option("--denoiser", f.bridge.denoiser, "oracle or zero");
  bridge->add_option("--trace-at", f.bridge.trace_at, "steps to export")->delimiter(',');
  bridge->add_option("--window", f.window, "PNG window lo,hi")->delimiter(',')->expected(2);
  bridge->add_option("--out", f.bridge.out, "output directory");
  o.add(bridge->add_option("--seed", f.config.seed, "seed"), f.config.seed, &RunConfig::seed);

  auto* correlate = app.add_subcommand("correlate", "condition, regenerate, re-extract and correlate");
  correlate->add_option("--sweep", f.correlate.sweep, "shape or texture")->required();
  correlate->add_option("--parameter", f.correlate.parameter, "volume, sphericity or correlation_length");
  correlate->add_option("--points", f.correlate.points, "sweep points (>= 10)");
  correlate->add_option("--out", f.correlate.out, "output prefix");
  o.add(correlate->add_option("--seed", f.config.seed, "seed"), f.config.seed, &RunConfig::seed);
  add_extraction_flags(correlate, f, o);

  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
  o.add(serve_cmd->add_option("--port", f.config.port, "port (0 picks a free one)"), f.config.port, &RunConfig::port);
  serve_cmd->add_option("--host", f.serve.host, "bind address");
  serve_cmd->add_option("--store-dir", f.store_dir, "persist stored volumes here");
  serve_cmd->add_option("--ui-dir", f.ui_dir, "static UI bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << error_json(Error(ErrorCode::BadParams, e.what())).dump() << std::endl;
    return 2;
  }

  try {
    RunConfig config = f.config_path.empty() ? RunConfig{} : RunConfig::load(f.config_path);
    for (const auto& apply : o.apply) apply(config);
    config.validate();

    if (extract->parsed()) {
      run_extract(f.extract, config);
    } else if (phantom->parsed()) {
      if (!f.grid.empty()) f.phantom.grid = expand3(f.grid);
      if (!f.spacing.empty()) f.phantom.spacing = expand3(f.spacing);
      if (!f.axis_ratios.empty()) f.phantom.axis_ratios = expand3(f.axis_ratios);
      if (sph->count()) f.phantom.sphericity = f.sphericity;
      if (lob->count()) f.phantom.lobulation = f.lobulation;
      std::cout << run_phantom(f.phantom, config, f.phantom_prefix).dump(2) << std::endl;
    } else if (bridge->parsed()) {
      if (!f.window.empty()) f.bridge.window = {f.window[0], f.window[1]};
      std::cout << run_bridge(f.bridge, config).dump(2) << std::endl;
    } else if (correlate->parsed()) {
      std::cout << run_correlate(f.correlate, config).dump(2) << std::endl;
    } else if (serve_cmd->parsed()) {
      f.serve.port = config.port;
      return serve(f, config);
    }
  } catch (const Error& e) {
    std::cerr << error_json(e).dump() << std::endl;
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"code", "Internal"}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
  return 0;
}
