#ifndef EASICS_ERROR_HPP
#define EASICS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace easics {

enum class ErrorCode {
    // dataset
    MissingHeader,
    RaggedRow,
    NonNumericCell,
    DuplicateSampleId,
    EmptyFile,
    InvalidSpec,
    // lle / eigen work
    KTooLarge,
    SingularLocalGram,
    EigenFailure,
    // som
    EmptyInput,
    DimMismatch,
    // ensemble
    EmptyEnsemble,
    // metrics
    SingleCluster,
    TooFewSamples,
    LengthMismatch,
    // consensus
    EmptyPartitionSet,
    IsolatedNode,
    AllCandidatesDegenerate,
    // pipeline
    ConfigInvalid,
    IoError,
};

const char* error_code_name(ErrorCode code);

// Whether an error is the caller's fault (bad config/input, CLI exit 1)
// or a runtime/numeric failure (CLI exit 2).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          message_(message) {}

    ErrorCode code() const noexcept { return code_; }

    // The message without the code prefix, for rewrapping.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingHeader: return "MissingHeader";
        case ErrorCode::RaggedRow: return "RaggedRow";
        case ErrorCode::NonNumericCell: return "NonNumericCell";
        case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::SingularLocalGram: return "SingularLocalGram";
        case ErrorCode::EigenFailure: return "EigenFailure";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
        case ErrorCode::SingleCluster: return "SingleCluster";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyPartitionSet: return "EmptyPartitionSet";
        case ErrorCode::IsolatedNode: return "IsolatedNode";
        case ErrorCode::AllCandidatesDegenerate: return "AllCandidatesDegenerate";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

inline bool is_validation_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingHeader:
        case ErrorCode::RaggedRow:
        case ErrorCode::NonNumericCell:
        case ErrorCode::DuplicateSampleId:
        case ErrorCode::EmptyFile:
        case ErrorCode::InvalidSpec:
        case ErrorCode::KTooLarge:
        case ErrorCode::EmptyInput:
        case ErrorCode::DimMismatch:
        case ErrorCode::SingleCluster:
        case ErrorCode::TooFewSamples:
        case ErrorCode::LengthMismatch:
        case ErrorCode::EmptyPartitionSet:
        case ErrorCode::ConfigInvalid:
        case ErrorCode::IoError:
            return true;
        default:
            return false;
    }
}

} // namespace easics

#endif
