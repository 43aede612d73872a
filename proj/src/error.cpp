#include "etadm/error.hpp"

namespace etadm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::TemplateSlotMissing: return "TemplateSlotMissing";
    case ErrorCode::QueueNotEmpty: return "QueueNotEmpty";
    case ErrorCode::InvalidFrame: return "InvalidFrame";
    case ErrorCode::LexError: return "LexError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TypeError: return "TypeError";
    case ErrorCode::ModelMissing: return "ModelMissing";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingVector: return "MissingVector";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownActionLabel: return "UnknownActionLabel";
    case ErrorCode::ReplayError: return "ReplayError";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::Busy: return "Busy";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_data_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaError:
    case ErrorCode::UnknownActionLabel:
    case ErrorCode::LexError:
    case ErrorCode::ParseError:
    case ErrorCode::TypeError:
    case ErrorCode::UnknownVariable:
    case ErrorCode::InvalidFrame:
    case ErrorCode::MissingVector:
    case ErrorCode::LabelOutOfRange:
    case ErrorCode::Io:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ReplayError:
      return true;
    default:
      return false;
  }
}

}  // namespace etadm
