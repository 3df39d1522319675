#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrtf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape disagreement between two operands. Carries the expected and actual sizes.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
      : Error(what + ": expected " + std::to_string(expected) + ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Invalid argument value (non-finite numbers, broken distributions, empty inputs).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// A local update or distillation loop left the finite domain.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t round, std::size_t client)
      : Error(what + " (round " + std::to_string(round) + ", client " + std::to_string(client) + ")"),
        round_(round),
        client_(client) {}

  std::size_t round() const noexcept { return round_; }
  std::size_t client() const noexcept { return client_; }

 private:
  std::size_t round_;
  std::size_t client_;
};

/// Rejected configuration entry. `key()` names the offending setting.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what) : Error(key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace mrtf
