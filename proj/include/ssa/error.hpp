#ifndef SSA_ERROR_HPP
#define SSA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ssa {

enum class ErrorCode {
    ValidationError,
    RangeError,
    DuplicateContactId,
    UnknownContact,
    UnknownSituation,
    InvalidCues,
    MissingField,
    EmptyDataset,
    ManifestMismatch,
    TooFewProfiles,
    TooFewExamples,
    UnknownRequest,
    ClosedRequest,
    UnknownSuggestion,
    UnknownDecision,
    UnknownConflict,
    InvalidCorrection,
    PreconditionViolation,
    StorageError,
    CorruptLog,
    SnapshotVersionMismatch,
};

const char* error_code_name(ErrorCode code);

// Internal errors map to exit status 2 in the CLI, everything else to 1.
bool is_internal(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string field = {})
        : std::runtime_error(message), code_(code), field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

}  // namespace ssa

#endif  // SSA_ERROR_HPP
