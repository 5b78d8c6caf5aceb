#pragma once

#include <cstdint>
#include <mutex>
#include <optional>

namespace fpvgl {

/// Single-slot handoff: writers overwrite, readers sample the newest value.
/// Nothing is queued, so a slow reader never builds a backlog.
template <class T>
class Latest {
 public:
  void store(T value) {
    std::lock_guard lock(mutex_);
    value_ = std::move(value);
    ++version_;
  }

  std::optional<T> load() const {
    std::lock_guard lock(mutex_);
    return value_;
  }

  T load_or(T fallback) const {
    std::lock_guard lock(mutex_);
    return value_ ? *value_ : fallback;
  }

  std::uint64_t version() const {
    std::lock_guard lock(mutex_);
    return version_;
  }

 private:
  mutable std::mutex mutex_;
  std::optional<T> value_;
  std::uint64_t version_ = 0;
};

}  // namespace fpvgl
