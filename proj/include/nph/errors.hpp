#pragma once

#include <stdexcept>
#include <string>

namespace nph {

// Base of every library error. ValidationError covers bad arguments and
// violated mathematical preconditions; IoError covers file-format and
// filesystem failures. The CLI maps them to exit codes 2 and 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// ----------------------------- validation ----------------------------------

class SingleMemoryError : public ValidationError {
public:
    SingleMemoryError() : ValidationError("operation needs at least two memory patterns") {}
};

class EmptyVectorError : public ValidationError {
public:
    EmptyVectorError() : ValidationError("vector argument must be nonempty") {}
};

class DimensionMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class KOutOfRangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class PositionOutOfRangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InvalidMaskError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EnumerationTooLargeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonFiniteError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OutOfDomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DegenerateRadiusError : public ValidationError {
public:
    DegenerateRadiusError()
        : ValidationError("duplicate memory patterns give radius 0; bound is undefined") {}
};

class HypothesisViolatedError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// --------------------------------- io ---------------------------------------

class FileOpenError : public IoError {
public:
    using IoError::IoError;
};

class BadMagicError : public IoError {
public:
    using IoError::IoError;
};

class TruncatedFileError : public IoError {
public:
    using IoError::IoError;
};

class DimensionOverflowError : public IoError {
public:
    using IoError::IoError;
};

class NonFiniteValueError : public IoError {
public:
    using IoError::IoError;
};

class CsvParseError : public IoError {
public:
    using IoError::IoError;
};

}  // namespace nph
