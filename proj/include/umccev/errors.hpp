#pragma once

#include <stdexcept>
#include <string>

namespace umccev {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A decomposition or solve failed (non-finite input, singular system).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The ADMM iterates became non-finite.
class DivergenceError : public Error {
public:
    DivergenceError(std::string variable, int iteration)
        : Error("solver diverged: non-finite entries in " + variable + " at iteration " +
                std::to_string(iteration)),
          variable_(std::move(variable)),
          iteration_(iteration) {}

    const std::string& variable() const noexcept { return variable_; }
    int iteration() const noexcept { return iteration_; }

private:
    std::string variable_;
    int iteration_;
};

class MissingFileError : public Error {
public:
    explicit MissingFileError(const std::string& path) : Error("file not found: " + path) {}
};

class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Views (or a view and the label file) disagree on the sample count.
class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

class LabelRangeError : public Error {
public:
    using Error::Error;
};

}  // namespace umccev
