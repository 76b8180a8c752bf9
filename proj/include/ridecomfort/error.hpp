#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ridecomfort {

enum class ErrorKind {
  EmptySignal,
  NonMonotonicTime,
  SignalTooShort,
  InvalidNormalization,
  InvalidWindow,
  FormatError,
  ParseError,
  EventOutOfRange,
  DegenerateLabels,
  SeparationDetected,
  NumericalFailure,
  UnitMismatch,
  DuplicateLine,
  EmptyProfile,
  InvalidProfile,
  LengthMismatch,
  EmptyReport,
  UnknownLine,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptySignal: return "EmptySignal";
    case ErrorKind::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorKind::SignalTooShort: return "SignalTooShort";
    case ErrorKind::InvalidNormalization: return "InvalidNormalization";
    case ErrorKind::InvalidWindow: return "InvalidWindow";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EventOutOfRange: return "EventOutOfRange";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::SeparationDetected: return "SeparationDetected";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::UnitMismatch: return "UnitMismatch";
    case ErrorKind::DuplicateLine: return "DuplicateLine";
    case ErrorKind::EmptyProfile: return "EmptyProfile";
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyReport: return "EmptyReport";
    case ErrorKind::UnknownLine: return "UnknownLine";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying its kind.
/// Parse-type errors also carry the 1-based line (and column, when known).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, long line = 0, long column = 0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what + location(line, column)),
        kind_(kind),
        line_(line),
        column_(column) {}

  ErrorKind kind() const noexcept { return kind_; }
  long line() const noexcept { return line_; }
  long column() const noexcept { return column_; }

 private:
  static std::string location(long line, long column) {
    if (line <= 0) return {};
    std::string s = " (line " + std::to_string(line);
    if (column > 0) s += ", column " + std::to_string(column);
    return s + ")";
  }

  ErrorKind kind_;
  long line_;
  long column_;
};

}  // namespace ridecomfort
