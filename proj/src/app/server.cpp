#include "radsynth/app/server.hpp"

#include <atomic>
#include <condition_variable>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "json_fields.hpp"
#include "radsynth/app/commands.hpp"

namespace radsynth::app {

namespace {

using json = nlohmann::json;

struct Job {
  std::string id;
  std::atomic<bool> cancel{false};
  std::mutex mutex;
  std::string state = "pending";  // pending, running, done, failed, cancelled
  json result = json::object();
  std::thread worker;
};

class JobRegistry {
 public:
  ~JobRegistry() { shutdown(); }

  std::shared_ptr<Job> start(const std::string& prefix, std::function<json(Job&)> work) {
    auto job = std::make_shared<Job>();
    {
      std::lock_guard lock(mutex_);
      job->id = prefix + "-" + std::to_string(++counter_);
      jobs_[job->id] = job;
    }
    job->worker = std::thread([job, work = std::move(work)] {
      set_state(*job, "running", json::object());
      try {
        json result = work(*job);
        set_state(*job, "done", std::move(result));
      } catch (const Error& e) {
        set_state(*job, e.code() == ErrorCode::Cancelled ? "cancelled" : "failed", {{"error", error_json(e)}});
      } catch (const std::exception& e) {
        set_state(*job, "failed", {{"error", {{"code", "Internal"}, {"message", e.what()}}}});
      }
    });
    return job;
  }

  std::shared_ptr<Job> get(const std::string& id, const std::string& prefix) const {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end() || id.rfind(prefix + "-", 0) != 0) {
      throw Error(ErrorCode::NotFound, "no job with id '" + id + "'");
    }
    return it->second;
  }

  void shutdown() {
    std::map<std::string, std::shared_ptr<Job>> jobs;
    {
      std::lock_guard lock(mutex_);
      jobs.swap(jobs_);
    }
    for (auto& [id, job] : jobs) job->cancel = true;
    for (auto& [id, job] : jobs) {
      if (job->worker.joinable()) job->worker.join();
    }
  }

  static json status(Job& job) {
    std::lock_guard lock(job.mutex);
    json out = job.result;
    out["job"] = job.id;
    out["state"] = job.state;
    return out;
  }

 private:
  static void set_state(Job& job, const std::string& state, json result) {
    std::lock_guard lock(job.mutex);
    job.state = state;
    job.result = std::move(result);
  }

  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::uint64_t counter_ = 0;
};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::TargetUnreachable: return 422;
    default: return 400;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadParams, std::string("request body is not valid JSON: ") + e.what());
  }
}

std::pair<double, double> parse_window(const std::string& text) {
  std::istringstream in(text);
  double lo = 0.0, hi = 0.0;
  char comma = 0;
  if (!(in >> lo >> comma >> hi) || comma != ',' || !(in >> std::ws).eof() || !(hi > lo)) {
    throw Error(ErrorCode::BadParams, "window must be 'lo,hi' with lo < hi");
  }
  return {lo, hi};
}

json volume_info(const StoreEntry& e) {
  const Dims& d = e.dims();
  const Spacing& s = e.spacing();
  return {{"id", e.id},
          {"kind", e.is_mask() ? "mask" : "volume"},
          {"dims", {d[0], d[1], d[2]}},
          {"spacing", {s[0], s[1], s[2]}},
          {"metadata", e.metadata}};
}

const VoxelVolume& as_volume(const StoreEntry& e) {
  if (e.is_mask()) throw Error(ErrorCode::BadParams, "'" + e.id + "' is a mask, expected a volume");
  return std::get<VoxelVolume>(e.content);
}

const BinaryMask& as_mask(const StoreEntry& e) {
  if (!e.is_mask()) throw Error(ErrorCode::BadParams, "'" + e.id + "' is a volume, expected a mask");
  return std::get<BinaryMask>(e.content);
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  VolumeStore store;
  JobRegistry jobs;
  httplib::Server server;
  int port = -1;

  explicit Impl(ServiceOptions o) : options(std::move(o)), store(options.store_dir) {
    options.config.validate();
    // httplib's default adds SO_REUSEPORT, which lets a second service bind a busy port
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    routes();
  }

  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_json(res, error_json(e), status_for(e.code()));
      }
    };
  }

  void routes() {
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "unknown error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      send_json(res, {{"code", "Internal"}, {"message", message}}, 500);
    });

    server.Post("/api/phantom", guarded([this](const httplib::Request& req, httplib::Response& res) {
      RunConfig config = options.config;
      const PhantomOptions po = PhantomOptions::from_json(parse_body(req), config);
      const Phantom p = make_phantom(po, config);
      const json spec = po.to_json();
      const std::string mask_id = store.insert(p.shape.mask, {{"source", "phantom"}, {"seed", config.seed}, {"spec", spec}});
      const std::string id = store.insert(p.volume, {{"source", "phantom"}, {"seed", config.seed}, {"spec", spec}, {"mask_id", mask_id}});
      const Dims& d = p.volume.dims();
      const Spacing& s = p.volume.spacing();
      send_json(res, {{"id", id},
                      {"mask_id", mask_id},
                      {"dims", {d[0], d[1], d[2]}},
                      {"spacing", {s[0], s[1], s[2]}},
                      {"seed", config.seed},
                      {"spec", spec},
                      {"achieved", {{"volume_mm3", p.shape.volume}, {"sphericity", p.shape.sphericity}}},
                      {"features", json::parse(features_to_json(p.features))}});
    }));

    server.Post("/api/extract", guarded([this](const httplib::Request& req, httplib::Response& res) {
      RunConfig config = options.config;
      const json body = parse_body(req);
      JsonFields f(body, "extract");
      const auto volume_id = f.get<std::string>("volume_id");
      const auto mask_id = f.get<std::string>("mask_id");
      f.read("discretization", config.discretization);
      f.read("bins", config.bins);
      f.read("bin_width", config.bin_width);
      f.finish();
      config.validate();
      if (!volume_id || !mask_id) throw Error(ErrorCode::BadParams, "extract needs volume_id and mask_id");
      const auto v = store.get(*volume_id);
      const auto m = store.get(*mask_id);
      const FeatureVector fv = extract_all(as_volume(*v), as_mask(*m), config.extraction());
      send_json(res, {{"volume_id", *volume_id}, {"mask_id", *mask_id}, {"features", json::parse(features_to_json(fv))}});
    }));

    server.Post("/api/bridge/preview", guarded([this](const httplib::Request& req, httplib::Response& res) {
      RunConfig config = options.config;
      const json body = parse_body(req);
      JsonFields f(body, "bridge");
      const auto volume_id = f.get<std::string>("volume_id");
      const auto mask_id = f.get<std::string>("mask_id");
      BridgeOptions bo;
      f.read("mode", bo.mode);
      f.read("denoiser", bo.denoiser);
      f.read("trace_at", bo.trace_at);
      f.read("T", config.total_steps);
      f.read("s", config.variance_scale);
      f.read("steps", config.inference_steps);
      f.read("seed", config.seed);
      f.finish();
      config.validate();
      if (!volume_id || !mask_id) throw Error(ErrorCode::BadParams, "bridge preview needs volume_id and mask_id");
      auto volume = store.get(*volume_id);
      auto mask = store.get(*mask_id);
      as_volume(*volume);
      as_mask(*mask);
      const BridgeSchedule sched(config.total_steps, config.variance_scale, config.inference_steps);
      if (bo.trace_at.empty()) {
        // up to 9 frames spread over the inference points, T first
        const auto& points = sched.inference_points();
        const std::size_t last = points.size() - 1;
        const std::size_t frames = std::min<std::size_t>(9, points.size());
        for (std::size_t k = 0; k < frames; ++k) bo.trace_at.push_back(points[last - k * last / (frames - 1)]);
      }
      parse_sampling_mode(bo.mode);
      const auto job = jobs.start("bridge", [this, volume, mask, bo, config](Job& self) {
        const VoxelVolume& x0 = as_volume(*volume);
        const BinaryMask& m = as_mask(*mask);
        const VoxelVolume y = apply_mask(x0, m, MaskMode::ZeroInside);
        const BridgeRun run = simulate_bridge(x0, y, &m, bo, config, [&self] { return self.cancel.load(); });
        json traces = json::array();
        for (const auto& [t, v] : run.traces) {
          traces.push_back({{"t", t}, {"id", store.insert(v, {{"source", "bridge"}, {"t", t}})}});
        }
        return json{{"traces", traces},
                    {"result_id", store.insert(run.result, {{"source", "bridge"}, {"t", 0}})},
                    {"manifest", run.manifest}};
      });
      send_json(res, {{"job", job->id}, {"state", "pending"}}, 202);
    }));

    server.Get(R"(/api/bridge/preview/([A-Za-z0-9-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, JobRegistry::status(*jobs.get(req.matches[1], "bridge")));
    }));

    server.Delete(R"(/api/bridge/preview/([A-Za-z0-9-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto job = jobs.get(req.matches[1], "bridge");
      job->cancel = true;
      send_json(res, {{"job", job->id}, {"cancel_requested", true}});
    }));

    server.Post("/api/sweep", guarded([this](const httplib::Request& req, httplib::Response& res) {
      RunConfig config = options.config;
      const CorrelateOptions co = CorrelateOptions::from_json(parse_body(req), config);
      default_sweep(co, config);  // validate before queueing
      const auto job = jobs.start("sweep", [co, config](Job&) {
        const CorrelationRun run = correlation_sweep(co, config);
        return json{{"summary", run.summary}, {"csv", sweep_to_csv(run.result)}};
      });
      send_json(res, {{"job", job->id}, {"state", "pending"}}, 202);
    }));

    server.Get(R"(/api/sweep/([A-Za-z0-9-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, JobRegistry::status(*jobs.get(req.matches[1], "sweep")));
    }));

    server.Get(R"(/api/volume/([0-9a-f]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, volume_info(*store.get(req.matches[1])));
    }));

    server.Get(R"(/api/volume/([0-9a-f]+)/slice/([xyz])/(-?\d+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto entry = store.get(req.matches[1]);
                 const Axis axis = parse_axis(req.matches[2]);
                 const int index = std::stoi(req.matches[3]);
                 SliceImage image;
                 if (entry->is_mask()) {
                   image = mask_slice(as_mask(*entry), axis, index);
                 } else {
                   const VoxelVolume& v = as_volume(*entry);
                   double lo = v.data().minCoeff(), hi = v.data().maxCoeff();
                   if (req.has_param("window")) {
                     std::tie(lo, hi) = parse_window(req.get_param_value("window"));
                   } else if (!(hi > lo)) {
                     hi = lo + 1.0;
                   }
                   image = extract_slice(v, axis, index, lo, hi);
                 }
                 const std::vector<std::uint8_t> png = encode_png(image);
                 res.set_content(std::string(png.begin(), png.end()), "image/png");
               }));

    server.Get("/api/features/schema", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(feature_schema_json(), "application/json");
    });

    if (options.ui_dir && !server.set_mount_point("/", options.ui_dir->string())) {
      throw Error(ErrorCode::IoFailure, "UI directory " + options.ui_dir->string() + " does not exist");
    }
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() {
  stop();
  impl_->jobs.shutdown();
}

int Service::bind() {
  auto& s = impl_->server;
  const auto& o = impl_->options;
  if (o.port == 0) {
    impl_->port = s.bind_to_any_port(o.host);
    if (impl_->port < 0) throw Error(ErrorCode::PortInUse, "cannot bind any port on " + o.host);
  } else {
    if (!s.bind_to_port(o.host, o.port)) {
      throw Error(ErrorCode::PortInUse, "port " + std::to_string(o.port) + " on " + o.host + " is in use");
    }
    impl_->port = o.port;
  }
  return impl_->port;
}

void Service::run() {
  if (impl_->port < 0) throw Error(ErrorCode::BadParams, "Service::run needs a bound port");
  impl_->server.listen_after_bind();
}

void Service::wait_until_ready() { impl_->server.wait_until_ready(); }

void Service::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

VolumeStore& Service::store() { return impl_->store; }

}  // namespace radsynth::app
