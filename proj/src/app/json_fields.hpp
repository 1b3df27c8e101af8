#pragma once

#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "radsynth/error.hpp"

namespace radsynth::app {

/// Typed access to the members of a JSON object. `finish()` rejects any
/// member that was never asked for.
class JsonFields {
 public:
  JsonFields(const nlohmann::json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j.is_object()) throw Error(ErrorCode::BadParams, context_ + " must be a JSON object");
  }

  template <typename T>
  std::optional<T> get(const std::string& key) {
    known_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_integer()) throw Error(ErrorCode::BadParams, context_ + "." + key + " must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && !it->is_number_unsigned() && it->template get<long long>() < 0) {
            throw Error(ErrorCode::BadParams, context_ + "." + key + " must be >= 0");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw Error(ErrorCode::BadParams, context_ + "." + key + " must be a number");
      }
      return it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadParams, context_ + "." + key + ": " + e.what());
    }
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (auto v = get<T>(key)) out = std::move(*v);
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    if (auto v = get<T>(key)) out = std::move(*v);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.count(key)) throw Error(ErrorCode::UnknownKey, "unknown key '" + key + "' in " + context_);
    }
  }

 private:
  const nlohmann::json& j_;
  std::string context_;
  std::set<std::string> known_;
};

}  // namespace radsynth::app
