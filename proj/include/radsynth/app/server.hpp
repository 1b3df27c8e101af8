#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "radsynth/app/config.hpp"
#include "radsynth/app/store.hpp"

namespace radsynth::app {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  /// 0 binds any free port.
  int port = 8080;
  std::optional<std::filesystem::path> store_dir;
  /// Static files served under "/" when set.
  std::optional<std::filesystem::path> ui_dir;
  RunConfig config;
};

/// HTTP JSON service.
///
///   POST   /api/phantom                        {id, mask_id, dims, spacing, features, achieved, spec}
///   POST   /api/extract                        {features}
///   POST   /api/bridge/preview                 202 {job}
///   GET    /api/bridge/preview/{job}           {state, traces, result_id, manifest}
///   DELETE /api/bridge/preview/{job}           cancels
///   POST   /api/sweep                          202 {job}
///   GET    /api/sweep/{job}                    {state, summary, csv}
///   GET    /api/volume/{id}                    {id, kind, dims, spacing, metadata}
///   GET    /api/volume/{id}/slice/{axis}/{i}   image/png, ?window=lo,hi
///   GET    /api/features/schema
///
/// Errors answer {code, message} with 404 for NotFound, 422 for
/// TargetUnreachable and 400 otherwise.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket and returns the port. Throws PortInUse.
  int bind();
  /// Serves until stop(); requires bind().
  void run();
  /// Blocks until run() is accepting connections.
  void wait_until_ready();
  void stop();

  VolumeStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace radsynth::app
