#pragma once

#include <stdexcept>
#include <string>

namespace bvocsr {

/// Failure categories. Each one maps onto a CLI exit code.
enum class ErrorKind {
  Config,     // bad configuration or arguments
  Data,       // malformed / missing input data, format violations
  Dimension,  // shape contracts violated
  Numeric,    // non-finite values, divergence
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config:
      return 2;
    case ErrorKind::Data:
    case ErrorKind::Dimension:
      return 3;
    case ErrorKind::Numeric:
      return 4;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace bvocsr
