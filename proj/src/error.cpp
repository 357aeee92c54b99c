#include "ssa/error.hpp"

namespace ssa {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::RangeError: return "RangeError";
        case ErrorCode::DuplicateContactId: return "DuplicateContactId";
        case ErrorCode::UnknownContact: return "UnknownContact";
        case ErrorCode::UnknownSituation: return "UnknownSituation";
        case ErrorCode::InvalidCues: return "InvalidCues";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::ManifestMismatch: return "ManifestMismatch";
        case ErrorCode::TooFewProfiles: return "TooFewProfiles";
        case ErrorCode::TooFewExamples: return "TooFewExamples";
        case ErrorCode::UnknownRequest: return "UnknownRequest";
        case ErrorCode::ClosedRequest: return "ClosedRequest";
        case ErrorCode::UnknownSuggestion: return "UnknownSuggestion";
        case ErrorCode::UnknownDecision: return "UnknownDecision";
        case ErrorCode::UnknownConflict: return "UnknownConflict";
        case ErrorCode::InvalidCorrection: return "InvalidCorrection";
        case ErrorCode::PreconditionViolation: return "PreconditionViolation";
        case ErrorCode::StorageError: return "StorageError";
        case ErrorCode::CorruptLog: return "CorruptLog";
        case ErrorCode::SnapshotVersionMismatch: return "SnapshotVersionMismatch";
    }
    return "Unknown";
}

bool is_internal(ErrorCode code) {
    return code == ErrorCode::StorageError || code == ErrorCode::CorruptLog ||
           code == ErrorCode::SnapshotVersionMismatch;
}

}  // namespace ssa
