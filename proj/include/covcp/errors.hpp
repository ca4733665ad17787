#ifndef COVCP_ERRORS_HPP
#define COVCP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace covcp {

enum class ErrorKind {
  config,
  shape,
  domain,
  degenerate_lrv,
  insufficient_data,
  ingestion,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::shape: return "shape";
    case ErrorKind::domain: return "domain";
    case ErrorKind::degenerate_lrv: return "degenerate_lrv";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::ingestion: return "ingestion";
  }
  return "unknown";
}

/// Base error. `code()` is module-qualified, e.g. "lrv.degenerate_lrv".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  std::string code() const { return module_ + "." + to_string(kind_); }

  /// Invalid configuration maps to exit code 2, everything else to 1.
  int exit_code() const noexcept { return kind_ == ErrorKind::config ? 2 : 1; }

 private:
  ErrorKind kind_;
  std::string module_;
};

struct ConfigError : Error {
  ConfigError(std::string module, const std::string& message)
      : Error(ErrorKind::config, std::move(module), message) {}
};

struct ShapeError : Error {
  ShapeError(std::string module, const std::string& message)
      : Error(ErrorKind::shape, std::move(module), message) {}
};

struct DomainError : Error {
  DomainError(std::string module, const std::string& message)
      : Error(ErrorKind::domain, std::move(module), message) {}
};

struct DegenerateLrvError : Error {
  DegenerateLrvError(std::string module, const std::string& message)
      : Error(ErrorKind::degenerate_lrv, std::move(module), message) {}
};

struct InsufficientDataError : Error {
  InsufficientDataError(std::string module, const std::string& message)
      : Error(ErrorKind::insufficient_data, std::move(module), message) {}
};

struct IngestError : Error {
  IngestError(std::string module, const std::string& message)
      : Error(ErrorKind::ingestion, std::move(module), message) {}
};

}  // namespace covcp

#endif  // COVCP_ERRORS_HPP
