#pragma once

#include <stdexcept>
#include <string>

namespace simclust {

/// Failure categories. The CLI maps them onto exit codes.
enum class ErrorKind {
  input,           // malformed or non-finite data
  parse,           // file could not be parsed
  parameter,       // argument outside its domain
  degenerate,      // input is valid but the operation has no answer (zero row sum)
  model,           // invalid likelihood parameters
  state,           // operation called on an object in the wrong state
  infeasible_prior,
  invariant,       // inconsistent state handed in by the caller
  size,            // problem too large for an exhaustive routine
  spectrum,        // eigenvalue precondition violated
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input: return "input error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::degenerate: return "degenerate input";
    case ErrorKind::model: return "model error";
    case ErrorKind::state: return "state error";
    case ErrorKind::infeasible_prior: return "infeasible prior";
    case ErrorKind::invariant: return "invariant violation";
    case ErrorKind::size: return "size error";
    case ErrorKind::spectrum: return "spectrum error";
  }
  return "error";
}

}  // namespace simclust
