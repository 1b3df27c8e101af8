#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "generators.hpp"
#include "radsynth/app/commands.hpp"
#include "radsynth/app/store.hpp"
#include "radsynth/mvol.hpp"

using namespace radsynth;
using namespace radsynth::app;
using namespace radsynth::testing;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::NotFound;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("radsynth_app_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PhantomOptions small_phantom() {
  PhantomOptions o;
  o.volume_mm3 = 2000.0;
  o.grid = {40, 40, 40};
  return o;
}

RunConfig config_in(const TempDir& dir) {
  RunConfig c;
  c.output_dir = dir.path.string();
  return c;
}

}  // namespace

TEST_CASE("exit codes and error JSON") {
  CHECK(exit_code_for(ErrorCode::TargetUnreachable) == 3);
  CHECK(exit_code_for(ErrorCode::PortInUse) == 4);
  CHECK(exit_code_for(ErrorCode::EmptyMask) == 2);
  CHECK(exit_code_for(ErrorCode::BadParams) == 2);
  const json j = error_json(Error(ErrorCode::EmptyMask, "nothing"));
  CHECK(j["code"] == "EmptyMask");
  CHECK(j["message"] == "nothing");
}

TEST_CASE("run config parsing") {
  const RunConfig c = RunConfig::from_json(json::parse(R"({"bins": 16, "T": 500, "steps": 50, "seed": 9, "s": 0.5})"));
  CHECK(c.bins == 16);
  CHECK(c.total_steps == 500);
  CHECK(c.inference_steps == 50);
  CHECK(c.seed == 9);
  CHECK(c.variance_scale == 0.5);
  CHECK(c.discretization == "count");

  CHECK(code_of([] { RunConfig::from_json(json::parse(R"({"binz": 16})")); }) == ErrorCode::UnknownKey);
  CHECK(code_of([] { RunConfig::from_json(json::parse(R"({"bins": "many"})")); }) == ErrorCode::BadParams);

  RunConfig bad;
  bad.bins = 1;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::BadParams);
  bad = RunConfig{};
  bad.discretization = "quantile";
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::BadParams);
  bad = RunConfig{};
  bad.inference_steps = 2000;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::BadParams);

  TempDir dir("config");
  {
    std::ofstream(dir / "c.json") << R"({"discretization": "width", "bin_width": 0.05})";
  }
  const RunConfig loaded = RunConfig::load(dir / "c.json");
  CHECK(loaded.discretization == "width");
  CHECK(std::holds_alternative<FixedBinWidth>(loaded.extraction().discretization));
  CHECK(code_of([&] { RunConfig::load(dir / "missing.json"); }) == ErrorCode::IoFailure);
}

TEST_CASE("phantom command writes byte-identical files for a seed") {
  TempDir dir("phantom");
  RunConfig config = config_in(dir);
  config.seed = 5;
  const PhantomOptions o = small_phantom();
  const json first = run_phantom(o, config, "a_");
  const json second = run_phantom(o, config, "b_");
  for (const std::string name : {"mask.mvol", "tumor.mvol", "features.csv"}) {
    CAPTURE(name);
    const std::string a = slurp(dir / ("a_" + name));
    CHECK(!a.empty());
    CHECK(a == slurp(dir / ("b_" + name)));
  }
  CHECK(first["achieved"] == second["achieved"]);
  CHECK(std::abs(first["achieved"]["volume_mm3"].get<double>() - 2000.0) < 0.02 * 2000.0);

  const BinaryMask m = read_mask(dir / "a_mask.mvol");
  const VoxelVolume v = read_volume(dir / "a_tumor.mvol");
  CHECK(m.dims().isApprox(v.dims()));
  CHECK(slurp(dir / "a_features.csv").starts_with("class,name,value\n"));

  config.seed = 6;
  run_phantom(o, config, "c_");
  CHECK(slurp(dir / "a_tumor.mvol") != slurp(dir / "c_tumor.mvol"));
}

TEST_CASE("phantom command refuses unreachable targets") {
  TempDir dir("unreachable");
  PhantomOptions o = small_phantom();
  o.axis_ratios = {1.0, 1.0, 3.0};
  o.sphericity = 0.99;
  const ErrorCode code = code_of([&] { run_phantom(o, config_in(dir), "x_"); });
  CHECK(code == ErrorCode::TargetUnreachable);
  CHECK(exit_code_for(code) == 3);
  CHECK(!fs::exists(dir / "x_mask.mvol"));
}

TEST_CASE("phantom options from JSON") {
  RunConfig config;
  const PhantomOptions o = PhantomOptions::from_json(
      json::parse(R"({"volume_mm3": 3000, "sphericity": 0.8, "grid": [32, 40, 48], "seed": 4, "bins": 24})"), config);
  CHECK(o.volume_mm3 == 3000.0);
  CHECK(o.sphericity == 0.8);
  CHECK(o.grid == std::array<int, 3>{32, 40, 48});
  CHECK(config.seed == 4);
  CHECK(config.bins == 24);
  CHECK(o.shape_spec(4).lobulation_amplitude == 1.5);
  CHECK(small_phantom().shape_spec(4).lobulation_amplitude == 0.0);
  CHECK(code_of([&] { PhantomOptions::from_json(json::parse(R"({"volume": 3000})"), config); }) ==
        ErrorCode::UnknownKey);
  CHECK(code_of([&] { PhantomOptions::from_json(json::parse(R"({"output_dir": "x"})"), config); }) ==
        ErrorCode::UnknownKey);

  const json round = o.to_json();
  RunConfig again;
  CHECK(PhantomOptions::from_json(round, again).to_json() == round);
}

TEST_CASE("extract command") {
  TempDir dir("extract");
  const RunConfig config = config_in(dir);
  Rng rng(3);
  const Dims dims(20, 18, 16);
  write_mvol(random_volume(rng, dims, 50), dir / "v.mvol");
  write_mvol(box_mask(dims, {4, 4, 4}, {14, 12, 11}), dir / "m.mvol");

  ExtractOptions e{dir / "v.mvol", dir / "m.mvol", "f.csv", ""};
  const FeatureVector fv = run_extract(e, config);
  CHECK(fv.size() == kFeatureCount);
  std::ifstream in(dir / "f.csv");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 91);

  e.out = "f.json";
  run_extract(e, config);
  const json j = json::parse(slurp(dir / "f.json"));
  REQUIRE(j.size() == kFeatureCount);
  CHECK(j[0]["class"] == "shape");

  SUBCASE("empty mask") {
    write_mvol(BinaryMask(dims, Spacing(1, 1, 1), std::uint8_t{0}), dir / "empty.mvol");
    e.mask = dir / "empty.mvol";
    const ErrorCode code = code_of([&] { run_extract(e, config); });
    CHECK(code == ErrorCode::EmptyMask);
    CHECK(exit_code_for(code) == 2);
  }
  SUBCASE("mismatched grids") {
    write_mvol(BinaryMask(Dims(20, 18, 15), Spacing(1, 1, 1), std::uint8_t{1}), dir / "small.mvol");
    e.mask = dir / "small.mvol";
    CHECK(code_of([&] { run_extract(e, config); }) == ErrorCode::DimMismatch);
  }
  SUBCASE("missing input") {
    e.volume = dir / "none.mvol";
    CHECK(code_of([&] { run_extract(e, config); }) == ErrorCode::IoFailure);
  }
  SUBCASE("volume passed as mask") {
    e.mask = dir / "v.mvol";
    CHECK(code_of([&] { run_extract(e, config); }) != ErrorCode::NotFound);
  }
}

TEST_CASE("bridge command with the oracle denoiser") {
  TempDir dir("bridge");
  RunConfig config = config_in(dir);
  config.inference_steps = 200;
  Rng rng(11);
  const Dims dims(24, 22, 20);
  const VoxelVolume raw = random_volume(rng, dims, 100);
  const VoxelVolume x0(dims, raw.spacing(), raw.data() / 100.0f);
  const BinaryMask m = box_mask(dims, {6, 6, 6}, {17, 15, 13});
  write_mvol(x0, dir / "x0.mvol");
  write_mvol(m, dir / "m.mvol");

  BridgeOptions b;
  b.x0 = dir / "x0.mvol";
  b.mask = dir / "m.mvol";
  b.trace_at = {1000, 500, 0};
  b.out = "run1";
  const json manifest = run_bridge(b, config);
  CHECK(manifest["max_abs_error_vs_x0"].get<double>() <= 1e-4);
  for (const int t : {1000, 500, 0}) {
    CHECK(fs::exists(dir.path / "run1" / ("trace_t" + std::to_string(t) + ".png")));
  }
  const VoxelVolume result = read_volume((dir.path / "run1" / "result.mvol").string());
  CHECK((result.data() - x0.data()).abs().maxCoeff() <= 1e-4f);

  b.out = "run2";
  run_bridge(b, config);
  CHECK(slurp((dir.path / "run1" / "result.mvol").string()) == slurp((dir.path / "run2" / "result.mvol").string()));
  CHECK(slurp((dir.path / "run1" / "trace_t500.png").string()) ==
        slurp((dir.path / "run2" / "trace_t500.png").string()));

  SUBCASE("stochastic runs repeat for a seed") {
    b.mode = "stochastic";
    b.denoiser = "zero";
    b.trace_at = {};
    b.out = "s1";
    run_bridge(b, config);
    b.out = "s2";
    run_bridge(b, config);
    CHECK(slurp((dir.path / "s1" / "result.mvol").string()) == slurp((dir.path / "s2" / "result.mvol").string()));
  }
  SUBCASE("invalid requests") {
    RunConfig bad = config;
    bad.inference_steps = 2000;
    CHECK(code_of([&] { run_bridge(b, bad); }) == ErrorCode::BadParams);
    BridgeOptions off = b;
    off.trace_at = {999};
    CHECK(code_of([&] { run_bridge(off, config); }) == ErrorCode::BadParams);
    off = b;
    off.mode = "sideways";
    CHECK(code_of([&] { run_bridge(off, config); }) == ErrorCode::BadParams);
    off = b;
    off.denoiser = "unet";
    CHECK(code_of([&] { run_bridge(off, config); }) == ErrorCode::BadParams);
    off = b;
    off.mask.clear();
    CHECK(code_of([&] { run_bridge(off, config); }) == ErrorCode::BadParams);
  }
}

TEST_CASE("simulate_bridge honours cancellation") {
  Rng rng(2);
  const Dims dims(12, 12, 12);
  const VoxelVolume x0 = gaussian_volume(rng, dims);
  const VoxelVolume y = constant_volume(dims, 0.0f);
  BridgeOptions b;
  RunConfig config;
  int polls = 0;
  CHECK(code_of([&] { simulate_bridge(x0, y, nullptr, b, config, [&] { return ++polls > 5; }); }) ==
        ErrorCode::Cancelled);
  CHECK(polls == 6);
}

TEST_CASE("correlate command") {
  TempDir dir("correlate");
  RunConfig config = config_in(dir);
  CorrelateOptions c;
  c.sweep = "shape";
  c.points = 10;
  c.out = "vol";

  const SweepDefinition def = default_sweep(c, config);
  CHECK(def.targets.size() == 10);
  CHECK(def.targets.front() == doctest::Approx(500.0));
  CHECK(def.targets.back() == doctest::Approx(20000.0));

  const json summary = run_correlate(c, config);
  CHECK(summary["kind"] == "shape");
  CHECK(summary["parameter"] == "volume");
  CHECK(summary["points"] == 10);
  const auto& first = summary["correlations"][0];
  CHECK(first["target"] == "volume");
  CHECK(first["spearman"].get<double>() >= 0.99);
  CHECK(first["pearson"].get<double>() >= 0.98);
  CHECK(fs::exists(dir / "vol.csv"));
  CHECK(fs::exists(dir / "vol_summary.json"));
  CHECK(fs::exists(dir / "vol_manifest.json"));

  c.out = "vol2";
  run_correlate(c, config);
  CHECK(slurp(dir / "vol.csv") == slurp(dir / "vol2.csv"));

  CorrelateOptions bad = c;
  bad.points = 9;
  CHECK(code_of([&] { default_sweep(bad, config); }) == ErrorCode::BadParams);
  bad = c;
  bad.parameter = "correlation_length";
  CHECK(code_of([&] { default_sweep(bad, config); }) == ErrorCode::BadParams);
  bad = c;
  bad.sweep = "colour";
  CHECK(code_of([&] { default_sweep(bad, config); }) == ErrorCode::BadParams);

  CorrelateOptions texture;
  texture.sweep = "texture";
  CHECK(default_sweep(texture, config).targets.size() == 15);
  CHECK(default_sweep(texture, config).parameter == "correlation_length");
}

TEST_CASE("volume store is content addressed") {
  TempDir dir("store");
  VolumeStore store(dir.path);
  Rng rng(4);
  const VoxelVolume v = gaussian_volume(rng, Dims(6, 5, 4));
  const std::string id = store.insert(v, {{"tag", "first"}});
  CHECK(id.size() == 32);
  CHECK(id == sha256_hex(encode_mvol(v)).substr(0, 32));
  CHECK(store.insert(v, {{"tag", "second"}}) == id);
  CHECK(store.size() == 1);
  CHECK(store.get(id)->metadata["tag"] == "first");
  CHECK(!store.get(id)->is_mask());
  CHECK(fs::exists(dir.path / (id + ".mvol")));
  CHECK(fs::exists(dir.path / (id + ".json")));
  CHECK(std::get<VoxelVolume>(decode_mvol(read_file_bytes((dir.path / (id + ".mvol")).string()))).data().isApprox(v.data()));

  const std::string mid = store.insert(BinaryMask(Dims(6, 5, 4), Spacing(1, 1, 1), std::uint8_t{1}));
  CHECK(mid != id);
  CHECK(store.get(mid)->is_mask());
  CHECK(store.find("0123") == nullptr);
  CHECK(code_of([&] { store.get("0123"); }) == ErrorCode::NotFound);

  // known digest of the empty input
  CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
