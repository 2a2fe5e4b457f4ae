#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lpturb {

/// Failure categories surfaced by the library. The CLI maps these onto the
/// machine-readable error JSON it prints on stderr.
enum class ErrorKind {
  configuration,
  range,
  domain,
  input,
  format,
  unsupported_version,
  io,
  step_size,
  divergence,
  fit,
  hypothesis,
  singular,
  degenerate,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::range: return "range";
    case ErrorKind::domain: return "domain";
    case ErrorKind::input: return "input";
    case ErrorKind::format: return "format";
    case ErrorKind::unsupported_version: return "unsupported_version";
    case ErrorKind::io: return "io";
    case ErrorKind::step_size: return "step_size";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::fit: return "fit";
    case ErrorKind::hypothesis: return "hypothesis";
    case ErrorKind::singular: return "singular";
    case ErrorKind::degenerate: return "degenerate";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Binary snapshot decoding failure; carries the byte offset that failed.
class FormatError : public Error {
 public:
  FormatError(ErrorKind kind, const std::string& what, std::uint64_t offset)
      : Error(kind, what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Raised by the solver; records the step index so callers can report it.
class StepError : public Error {
 public:
  StepError(ErrorKind kind, const std::string& what, long step)
      : Error(kind, what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace lpturb
