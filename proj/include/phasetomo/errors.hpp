#pragma once

#include <stdexcept>
#include <string>

namespace phasetomo {

// Malformed or out-of-range run configuration. Line/column are 1-based and
// zero when the error is semantic rather than syntactic.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0, int column = 0)
      : std::runtime_error(what), key_(std::move(key)), line_(line), column_(column) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  std::string key_;
  int line_;
  int column_;
};

// A numerical routine failed to converge or produced an inconsistent result.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::string path)
      : std::runtime_error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace phasetomo
