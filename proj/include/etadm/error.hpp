#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace etadm {

enum class ErrorCode {
  UnknownVariable,
  TemplateSlotMissing,
  QueueNotEmpty,
  InvalidFrame,
  LexError,
  ParseError,
  TypeError,
  ModelMissing,
  DimensionMismatch,
  MissingVector,
  LabelOutOfRange,
  SchemaError,
  UnknownActionLabel,
  ReplayError,
  EmptySplit,
  EmptyTrainingSet,
  UnknownSession,
  Busy,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is the
/// stable, machine-checkable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // what() without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

/// True for errors caused by malformed input files or definitions, as opposed
/// to failures while running a well-formed configuration.
bool is_data_error(ErrorCode code);

}  // namespace etadm
