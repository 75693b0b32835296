#pragma once

#include <stdexcept>
#include <string>

namespace leap {

/// Invalid configuration or dataset inputs; maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Generation backend failure. `retriable` distinguishes transport faults
/// (already retried up to the attempt limit) from permanent rejections
/// such as context overflow.
struct BackendError : std::runtime_error {
  bool retriable;
  int attempts;
  BackendError(const std::string& what, bool retriable_, int attempts_)
      : std::runtime_error(what), retriable(retriable_), attempts(attempts_) {}
};

}  // namespace leap
