#pragma once

#include <stdexcept>
#include <string>

namespace mcs {

enum class ErrorKind {
    NonDivisibleLength,
    LengthMismatch,
    InvalidKey,
    DomainError,
    InconsistentWeights,
    UnresolvedExpansion,
    InvalidDeltaSum,
    MalformedColumn,
    MalformedRow,
    AmbiguousMatch,
    AttackFailed,
    CiphertextTooLong,
    IllegalSet,
    ParseError,
    IoError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception of the library. The kind is stable and meant for callers
/// that dispatch on failure class; the message is for humans.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

/// Raised by run_attack when a stage cannot complete. `stage()` names the
/// stage and `cause()` the kind of the underlying error.
class AttackFailed : public Error
{
public:
    AttackFailed(std::string stage, ErrorKind cause, const std::string& detail);

    const std::string& stage() const noexcept { return stage_; }
    ErrorKind cause() const noexcept { return cause_; }

private:
    std::string stage_;
    ErrorKind cause_;
};

} // namespace mcs
