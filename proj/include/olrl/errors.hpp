#pragma once

#include <stdexcept>
#include <string>

namespace olrl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of matrices or trajectories do not agree.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DivergedRollout : public Error {
 public:
  explicit DivergedRollout(int step)
      : Error("rollout diverged: non-finite state at step " +
              std::to_string(step)),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class DivergedProbe : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  ProviderError(int t, const std::string& what)
      : Error("Jacobian provider failed at t=" + std::to_string(t) + ": " +
              what),
        t_(t) {}
  int t() const { return t_; }

 private:
  int t_;
};

class NumericOverflow : public Error {
 public:
  NumericOverflow(int t, const std::string& what)
      : Error(what + " (t=" + std::to_string(t) + ")"), t_(t) {}
  int t() const { return t_; }

 private:
  int t_;
};

class TrainingFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace olrl
