#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace modoma {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or malformed input specification (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Grammar-spec syntax error; carries the 1-based line number.
class SpecParseError : public ConfigError {
public:
    SpecParseError(std::size_t line, const std::string& what)
        : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Grammar-spec that parses but violates a model invariant.
class ValidationError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Problem with the data being processed (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class EmptyCorpusError : public DataError {
public:
    using DataError::DataError;
};

/// Not enough corpus, rows or targets to carry out a computation.
class InsufficientDataError : public DataError {
public:
    using DataError::DataError;
};

/// A caller violated an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class GrammarError : public Error {
public:
    using Error::Error;
};

class DuplicateEntryError : public GrammarError {
public:
    using GrammarError::GrammarError;
};

/// A feature already holds a different value on the entry.
class FeatureConflictError : public GrammarError {
public:
    using GrammarError::GrammarError;
};

class LinearizeError : public GrammarError {
public:
    using GrammarError::GrammarError;
};

} // namespace modoma
