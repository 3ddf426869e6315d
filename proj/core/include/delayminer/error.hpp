#pragma once

#include <stdexcept>
#include <string>

namespace delayminer {

// Error categories map onto the CLI exit codes: validation-like errors exit
// with 3, everything else raised at run time exits with 4.
enum class ErrorKind {
  kArgument,
  kSchema,
  kValidation,
  kIo,
  kSimulation,
  kResourceLimit,
  kOptimization,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_validation() const noexcept {
    return kind_ == ErrorKind::kArgument || kind_ == ErrorKind::kSchema ||
           kind_ == ErrorKind::kValidation;
  }

 private:
  ErrorKind kind_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(ErrorKind::kArgument, what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(ErrorKind::kSchema, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class SimulationError : public Error {
 public:
  explicit SimulationError(const std::string& what) : Error(ErrorKind::kSimulation, what) {}
};

class ResourceLimitError : public Error {
 public:
  explicit ResourceLimitError(const std::string& what) : Error(ErrorKind::kResourceLimit, what) {}
};

class OptimizationError : public Error {
 public:
  explicit OptimizationError(const std::string& what) : Error(ErrorKind::kOptimization, what) {}
};

}  // namespace delayminer
