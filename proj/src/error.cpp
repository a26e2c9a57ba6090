#include "error.hpp"

namespace polyg2p {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedPinyin: return "MalformedPinyin";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Format: return "FormatError";
    case ErrorKind::UnknownCharacter: return "UnknownCharacter";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InvalidIndex: return "InvalidIndex";
    case ErrorKind::SequenceTooLong: return "SequenceTooLong";
    case ErrorKind::AnswerTooLong: return "AnswerTooLong";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyCandidateList: return "EmptyCandidateList";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Checkpoint: return "CheckpointError";
  }
  return "Error";
}

}  // namespace polyg2p
