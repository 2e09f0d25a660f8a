#pragma once

#include <stdexcept>
#include <string>

namespace cgi {

// Error taxonomy mirrored by the CLI exit codes:
// ConfigError -> 2, IoError -> 3, NumericError -> 4.

/// Invalid parameters, dimension mismatches, malformed configuration.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// File system failures and malformed/truncated on-disk data.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Degenerate numeric situations (empty regions, zero variance, n = 0).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cgi
