#include "radsynth/app/store.hpp"

#include <cstdio>

#include <openssl/evp.h>

namespace radsynth::app {

std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr)) {
    throw Error(ErrorCode::IoFailure, "SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

const Dims& StoreEntry::dims() const {
  return std::visit([](const auto& g) -> const Dims& { return g.dims(); }, content);
}

const Spacing& StoreEntry::spacing() const {
  return std::visit([](const auto& g) -> const Spacing& { return g.spacing(); }, content);
}

VolumeStore::VolumeStore(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (dir_) {
    std::error_code ec;
    std::filesystem::create_directories(*dir_, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create store directory " + dir_->string());
  }
}

std::string VolumeStore::insert(MvolContent content, nlohmann::json metadata) {
  const std::vector<std::uint8_t> bytes = std::visit([](const auto& g) { return encode_mvol(g); }, content);
  const std::string id = sha256_hex(bytes).substr(0, 32);
  {
    std::lock_guard lock(mutex_);
    if (entries_.count(id)) return id;
  }
  auto entry = std::make_shared<StoreEntry>(StoreEntry{id, std::move(content), std::move(metadata)});
  if (dir_) {
    // write-then-rename so a reader of the directory never sees a partial file
    const auto base = *dir_ / id;
    write_file_bytes(base.string() + ".mvol.tmp", bytes);
    std::filesystem::rename(base.string() + ".mvol.tmp", base.string() + ".mvol");
    const std::string meta = entry->metadata.dump(2) + "\n";
    write_file_bytes(base.string() + ".json", std::vector<std::uint8_t>(meta.begin(), meta.end()));
  }
  std::lock_guard lock(mutex_);
  entries_.emplace(id, std::move(entry));
  return id;
}

std::shared_ptr<const StoreEntry> VolumeStore::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : it->second;
}

std::shared_ptr<const StoreEntry> VolumeStore::get(const std::string& id) const {
  auto entry = find(id);
  if (!entry) throw Error(ErrorCode::NotFound, "no volume with id '" + id + "'");
  return entry;
}

std::size_t VolumeStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace radsynth::app
