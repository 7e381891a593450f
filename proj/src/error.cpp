#include "infers/error.hpp"

namespace infers {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::TooFewRecords: return "TooFewRecords";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::ZeroCovariance: return "ZeroCovariance";
    case ErrorCode::SignInconsistency: return "SignInconsistency";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::LambdaParentZero: return "LambdaParentZero";
    case ErrorCode::DegenerateCalibration: return "DegenerateCalibration";
    case ErrorCode::NoMinimaFound: return "NoMinimaFound";
    case ErrorCode::NoFeasibleRegion: return "NoFeasibleRegion";
    case ErrorCode::InfeasibleParams: return "InfeasibleParams";
    case ErrorCode::SubsetTooSmall: return "SubsetTooSmall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
{
}

}  // namespace infers
