#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "radsynth/mvol.hpp"

namespace radsynth::app {

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);

struct StoreEntry {
  std::string id;
  MvolContent content;
  nlohmann::json metadata;

  bool is_mask() const { return std::holds_alternative<BinaryMask>(content); }
  const Dims& dims() const;
  const Spacing& spacing() const;
};

/// Immutable, content-addressed volumes and masks. The id is the first 32
/// hex digits of the SHA-256 of the MVOL encoding, so inserting the same
/// content twice returns the same id and keeps the first metadata.
class VolumeStore {
 public:
  /// With a directory, every new entry is also written there as
  /// `<id>.mvol` plus `<id>.json`.
  explicit VolumeStore(std::optional<std::filesystem::path> dir = std::nullopt);

  std::string insert(MvolContent content, nlohmann::json metadata = nlohmann::json::object());
  /// Null when absent.
  std::shared_ptr<const StoreEntry> find(const std::string& id) const;
  /// Throws NotFound.
  std::shared_ptr<const StoreEntry> get(const std::string& id) const;
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const StoreEntry>> entries_;
};

}  // namespace radsynth::app
