#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fmtt {

/// Failure categories. The CLI prints the category name as the first token
/// of its one-line error report, so names are stable.
enum class ErrorKind {
  WrongLength,
  BadHeader,
  ChecksumMismatch,
  IndexOutOfRange,
  VelocityOutOfRange,
  BadFrameOrdering,
  TupleOverflow,
  DatasetTooSmall,
  EmptyDataset,
  IoError,
  BadMagic,
  VersionMismatch,
  ShapeMismatch,
  UnsupportedSampleRate,
  UnsupportedEncoding,
  UnknownAlgorithm,
  EmptyInput,
  ZeroReference,
  NoNoteFound,
  NoRampFound,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fmtt
