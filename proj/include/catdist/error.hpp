#pragma once

#include <stdexcept>
#include <string>

namespace catdist {

// Error categories map onto CLI exit codes: usage 1, data 2, numeric domain 3.
enum class ErrorKind { Usage = 1, Data = 2, Domain = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed invocation or arguments that violate an operation's preconditions.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// Input data that cannot be ingested or does not fit the schema it is used with.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// A formula evaluated outside its domain (log of 1 in a denominator, infinite divergence, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

}  // namespace catdist
