#pragma once

#include <stdexcept>
#include <string>

namespace kramers {

enum class ErrorKind {
  kInvalidDimension,
  kInvalidShape,
  kInvalidInput,
  kOutOfSupport,
  kPoleProximity,
  kNumericalFailure,
  kCalibrationFailure,
  kFitFailure,
  kDegenerateEnsemble,
  kInvalidReference,
  kParse,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Config and spec files report the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& what)
      : Error(ErrorKind::kParse, source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidDimension: return "invalid dimension";
    case ErrorKind::kInvalidShape: return "invalid shape";
    case ErrorKind::kInvalidInput: return "invalid input";
    case ErrorKind::kOutOfSupport: return "out of support";
    case ErrorKind::kPoleProximity: return "pole proximity";
    case ErrorKind::kNumericalFailure: return "numerical failure";
    case ErrorKind::kCalibrationFailure: return "calibration failure";
    case ErrorKind::kFitFailure: return "fit failure";
    case ErrorKind::kDegenerateEnsemble: return "degenerate ensemble";
    case ErrorKind::kInvalidReference: return "invalid reference";
    case ErrorKind::kParse: return "parse error";
  }
  return "error";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace kramers
