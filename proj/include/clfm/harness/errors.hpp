#pragma once

#include <stdexcept>
#include <string>

namespace clfm::harness {

/// Invalid or unreadable configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A pipeline stage failed; `stage` names it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what, bool numerical)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), numerical_(numerical) {}
  const std::string& stage() const { return stage_; }
  bool numerical() const { return numerical_; }

 private:
  std::string stage_;
  bool numerical_;
};

/// Checkpoint content does not match its recorded digest.
class DigestError : public std::runtime_error {
 public:
  explicit DigestError(const std::string& what) : std::runtime_error(what) {}
};

/// Checkpoint written for a different format version or architecture.
class CheckpointMismatch : public std::runtime_error {
 public:
  explicit CheckpointMismatch(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

}  // namespace clfm::harness
