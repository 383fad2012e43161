#include "fmtt/error.hpp"

namespace fmtt {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::WrongLength: return "WrongLength";
    case ErrorKind::BadHeader: return "BadHeader";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::VelocityOutOfRange: return "VelocityOutOfRange";
    case ErrorKind::BadFrameOrdering: return "BadFrameOrdering";
    case ErrorKind::TupleOverflow: return "TupleOverflow";
    case ErrorKind::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::UnsupportedSampleRate: return "UnsupportedSampleRate";
    case ErrorKind::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::UnknownAlgorithm: return "UnknownAlgorithm";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ZeroReference: return "ZeroReference";
    case ErrorKind::NoNoteFound: return "NoNoteFound";
    case ErrorKind::NoRampFound: return "NoRampFound";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace fmtt
