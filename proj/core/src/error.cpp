#include "mcs/error.hpp"

namespace mcs {

const char* to_string(ErrorKind kind) noexcept
{
    switch(kind)
    {
    case ErrorKind::NonDivisibleLength: return "NonDivisibleLength";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidKey: return "InvalidKey";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InconsistentWeights: return "InconsistentWeights";
    case ErrorKind::UnresolvedExpansion: return "UnresolvedExpansion";
    case ErrorKind::InvalidDeltaSum: return "InvalidDeltaSum";
    case ErrorKind::MalformedColumn: return "MalformedColumn";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::AmbiguousMatch: return "AmbiguousMatch";
    case ErrorKind::AttackFailed: return "AttackFailed";
    case ErrorKind::CiphertextTooLong: return "CiphertextTooLong";
    case ErrorKind::IllegalSet: return "IllegalSet";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
 : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message)
{}

AttackFailed::AttackFailed(std::string stage, ErrorKind cause, const std::string& detail)
 : Error(ErrorKind::AttackFailed, "[" + stage + "] " + to_string(cause) + ": " + detail),
   stage_(std::move(stage)), cause_(cause)
{}

} // namespace mcs
