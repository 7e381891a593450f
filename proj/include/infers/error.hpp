#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace infers {

enum class ErrorCode {
    EmptySubset,
    NonFiniteInput,
    DegenerateVariance,
    TooFewRecords,
    SingularCovariance,
    ZeroCovariance,
    SignInconsistency,
    SingularSystem,
    LambdaParentZero,
    DegenerateCalibration,
    NoMinimaFound,
    NoFeasibleRegion,
    InfeasibleParams,
    SubsetTooSmall,
    InvalidArgument,
    MissingColumn,
    ParseError,
    EmptyFile,
    IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (sweeps, the CLI) can branch on the kind of failure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace infers
