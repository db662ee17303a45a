#pragma once

#include <stdexcept>
#include <string>

namespace nvspin {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateNullspace : Error { using Error::Error; };
struct NotTracePreserving : Error { using Error::Error; };
struct SingularAtFrequency : Error { using Error::Error; };
struct InsufficientDecay : Error { using Error::Error; };
struct PerturbationInvalid : Error { using Error::Error; };
struct UnknownKind : Error { using Error::Error; };
struct StepTooCoarse : Error { using Error::Error; };
struct StatisticsTooPoor : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

struct ParseError : Error {
  int line, column;
  ParseError(const std::string& msg, int l, int c)
      : Error(msg + " (line " + std::to_string(l) + ", column " + std::to_string(c) + ")"),
        line(l), column(c) {}
};

struct ValidationError : Error {
  std::string field;
  ValidationError(const std::string& f, const std::string& msg)
      : Error(f + ": " + msg), field(f) {}
};

}  // namespace nvspin
