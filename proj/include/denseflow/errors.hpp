#pragma once

#include <stdexcept>
#include <string>

namespace denseflow {

// Base of all library errors. exit_code() is the process exit status the CLI
// maps the error to: 1 for validation/format problems, 2 for numerical
// instability detected inside a solver.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const noexcept { return 1; }
};

// Mismatched grid dimensions between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Input too small or otherwise unusable for the requested operation.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Invalid user-supplied parameter value.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Malformed byte stream (bad magic, truncation, bad header).
class FormatError : public Error {
public:
    using Error::Error;
};

// Attempt to serialize a value the format cannot represent.
class EncodingError : public Error {
public:
    using Error::Error;
};

// Missing or unreadable dataset file.
class IngestionError : public Error {
public:
    using Error::Error;
};

// Files that individually parse but disagree with each other.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// An aggregate was requested over zero elements.
class EmptyDomainError : public Error {
public:
    using Error::Error;
};

// A solver produced a non-finite intermediate value.
class NumericalInstabilityError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

} // namespace denseflow
