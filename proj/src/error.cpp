#include "tubalcast/error.hpp"

namespace tubalcast {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NonRealResult: return "NonRealResult";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::RankOutOfRange: return "RankOutOfRange";
    case ErrorKind::ZeroTensor: return "ZeroTensor";
    case ErrorKind::InvalidRate: return "InvalidRate";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyObservation: return "EmptyObservation";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::GraphUnavailable: return "GraphUnavailable";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NegativeTraffic: return "NegativeTraffic";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::DegenerateRange: return "DegenerateRange";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ZeroTruth: return "ZeroTruth";
    case ErrorKind::MissingCheckpoint: return "MissingCheckpoint";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::IntegrityError: return "IntegrityError";
  }
  return "Unknown";
}

}  // namespace tubalcast
