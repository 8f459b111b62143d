#pragma once

#include <stdexcept>
#include <string>

namespace kgroot {

// Base of every error raised by the library. Each subclass maps to one
// error family so the CLI can translate it into a stable exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class PreconditionViolated : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class ShapeMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InvalidParams : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateEventId : public DataError {
public:
    using DataError::DataError;
};

class NoMatchingTemplate : public DataError {
public:
    using DataError::DataError;
};

class DegenerateData : public DataError {
public:
    using DataError::DataError;
};

class InsufficientVocabulary : public DataError {
public:
    using DataError::DataError;
};

class EmptyCases : public DataError {
public:
    using DataError::DataError;
};

class EmptyKnowledgeBase : public Error {
public:
    using Error::Error;
};

class AlarmNotInGraph : public Error {
public:
    using Error::Error;
};

class UnknownFailureId : public Error {
public:
    using Error::Error;
};

class ModelMismatch : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace kgroot
