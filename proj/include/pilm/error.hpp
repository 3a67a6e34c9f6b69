#ifndef PILM_ERROR_HPP
#define PILM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pilm {

/// Broad failure category; the CLI maps each to its own exit code.
enum class ErrorKind { config, data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Raised when a coordinate falls outside the model domain.
class DomainError : public DataError {
 public:
  using DataError::DataError;
};

/// The regularized normal matrix is singular or indefinite.
class UnderdeterminedError : public NumericalError {
 public:
  UnderdeterminedError(const std::string& what, long deficiency)
      : NumericalError(what), deficiency_(deficiency) {}
  long deficiency() const noexcept { return deficiency_; }

 private:
  long deficiency_;
};

}  // namespace pilm

#endif  // PILM_ERROR_HPP
