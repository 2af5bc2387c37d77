#pragma once

#include <stdexcept>
#include <string>

namespace felpair {

// Base error carrying the CLI exit code (0 success, 2 config, 3 physics
// domain, 4 convergence failure).
class Error : public std::runtime_error {
 public:
  Error(const std::string& msg, int exit_code)
      : std::runtime_error(msg), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

// Invalid, inconsistent or unknown configuration input.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg, 2) {}
};

// Physics-domain failures: closed channels, degenerate kinematics,
// propagator resonances, undefined states.
class PhysicsError : public Error {
 public:
  explicit PhysicsError(const std::string& msg) : Error(msg, 3) {}
};

class DegenerateKinematicsError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class ChannelClosedError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class ResonanceError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class UndefinedStateError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

// A caller handed us data violating a documented precondition.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error(msg, 3) {}
};

// An adaptive procedure hit its hard cap before reaching tolerance.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& msg) : Error(msg, 4) {}
};

}  // namespace felpair
