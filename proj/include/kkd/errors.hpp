#pragma once

#include <stdexcept>

namespace kkd {

/// Violated runtime precondition (minimum phase, weak LO, ...). The CLI maps
/// this to exit code 3.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or incomplete experiment configuration; exit code 2 in the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kkd
