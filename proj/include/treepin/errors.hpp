#pragma once

#include <stdexcept>
#include <string>

namespace treepin {

// Bad user-supplied configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Valid configuration but outside the mathematical or resource domain
// of the requested operation (CLI exit code 3).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateDisorder : DomainError {
    explicit DegenerateDisorder(const std::string& msg) : DomainError(msg) {}
};

struct BetaZero : DomainError {
    explicit BetaZero(const std::string& msg) : DomainError(msg) {}
};

struct OutOfDomain : DomainError {
    explicit OutOfDomain(const std::string& msg) : DomainError(msg) {}
};

struct NonpositiveDenominator : DomainError {
    explicit NonpositiveDenominator(const std::string& msg) : DomainError(msg) {}
};

struct DegenerateDefectArity : DomainError {
    explicit DegenerateDefectArity(const std::string& msg) : DomainError(msg) {}
};

struct DepthTooLarge : DomainError {
    explicit DepthTooLarge(const std::string& msg) : DomainError(msg) {}
};

struct WrongModelKind : DomainError {
    explicit WrongModelKind(const std::string& msg) : DomainError(msg) {}
};

struct SupportTooLarge : DomainError {
    explicit SupportTooLarge(const std::string& msg) : DomainError(msg) {}
};

struct ContinuousDisorder : DomainError {
    explicit ContinuousDisorder(const std::string& msg) : DomainError(msg) {}
};

struct IndexOutOfRange : DomainError {
    explicit IndexOutOfRange(const std::string& msg) : DomainError(msg) {}
};

}  // namespace treepin
