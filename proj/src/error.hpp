#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polyg2p {

enum class ErrorKind {
  MalformedPinyin,
  Io,
  Schema,
  Format,
  UnknownCharacter,
  IndexOutOfRange,
  InvalidIndex,
  SequenceTooLong,
  AnswerTooLong,
  EmptyDataset,
  EmptyCandidateList,
  BackendUnavailable,
  InvalidArgument,
  Checkpoint,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so the C API can map it
// to a status code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Schema and format errors point at a 1-based line of the offending file.
class LineError : public Error {
 public:
  LineError(ErrorKind kind, std::size_t line, const std::string& reason)
      : Error(kind, "line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace polyg2p
