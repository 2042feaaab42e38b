#pragma once

#include <stdexcept>
#include <string>

namespace audit {

enum class ErrorCode {
    // bundle / config
    ParseError,
    UnknownSlot,
    DuplicatePhrase,
    TemplateCount,
    ConfigError,
    // llm client
    AuthError,
    RateLimited,
    Timeout,
    MalformedResponse,
    EndpointFailure,
    AllSamplesFailed,
    InvalidProfile,
    // corpus
    DuplicateKey,
    IoError,
    IncompleteCorpus,
    BundleMismatch,
    LockHeld,
    // analysis
    EmptyGroup,
    EmptyCell,
    MismatchedCell,
    VerdictParseFailure,
    DegenerateGroups,
    EmptyGrid,
};

/// All recoverable failures surface as AuditError; the code is stable so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class AuditError : public std::runtime_error {
public:
    AuditError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace audit
