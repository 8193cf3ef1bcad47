#pragma once

#include <stdexcept>
#include <string>

namespace topo {

// Invalid argument to an operation (bad sizes, out-of-range values).
class ParamError : public std::invalid_argument {
public:
  explicit ParamError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Inconsistent problem setup (loads on fixed DOFs, indivisible grids, ...).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A linear solve or design update could not be completed.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// The projection or reduced basis is numerically rank deficient. Callers
// fall back to an iterative solve when they catch this.
class DegenerateBasisError : public SolverError {
public:
  explicit DegenerateBasisError(const std::string& msg) : SolverError(msg) {}
};

// File input/output failure.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace topo
