#pragma once

#include <stdexcept>
#include <string>

namespace fnce {

// Base for every error the library raises on its own behalf.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or length disagreement between operands.
struct DimensionError : Error {
    using Error::Error;
};

// Input that is syntactically valid but numerically unusable
// (zero-norm row, non-finite entry, ...).
struct DegenerateInputError : Error {
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Hyperparameter or config value outside its allowed bounds.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed file content; message carries the byte offset or line number.
struct ParseError : Error {
    using Error::Error;
};

// Filesystem-level failure; message carries the path.
struct IoError : Error {
    using Error::Error;
};

// Non-finite parameter detected during training; carries the step index.
struct DivergenceError : Error {
    DivergenceError(const std::string& what, long step) : Error(what), step(step) {}
    long step;
};

}  // namespace fnce
