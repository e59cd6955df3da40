#pragma once

#include <stdexcept>
#include <string>

namespace preflab::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitDataError = 2,
  kExitConflict = 3,
  kExitConfigError = 4,
  kExitMissingArtifact = 5,
};

/// Command-level failure carrying its exit code.
class CommandError : public std::runtime_error {
public:
  CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

private:
  int code_;
};

inline CommandError conflict(const std::string& what) { return {kExitConflict, what}; }
inline CommandError config_error(const std::string& what) { return {kExitConfigError, what}; }
inline CommandError missing_artifact(const std::string& what) { return {kExitMissingArtifact, what}; }
inline CommandError data_error(const std::string& what) { return {kExitDataError, what}; }

}  // namespace preflab::app
