#pragma once

#include <stdexcept>
#include <string>

namespace pantry {

// Error taxonomy shared across the library. The CLI maps these onto its
// exit-code contract: ValidationError and friends -> 1, IoError -> 2.

/// Bad user input: malformed values, unknown names, dimension mismatches.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shape or argument mismatch on a library call.
class ArgumentError : public ValidationError {
 public:
  explicit ArgumentError(const std::string& msg) : ValidationError(msg) {}
};

/// A graph or model whose structure does not admit the requested operation.
class StructureError : public ValidationError {
 public:
  explicit StructureError(const std::string& msg) : ValidationError(msg) {}
};

/// Operation invoked in the wrong state (e.g. backward without a tape).
class StateError : public ValidationError {
 public:
  explicit StateError(const std::string& msg) : ValidationError(msg) {}
};

/// NaN/Inf detected where all values must stay finite.
class NumericError : public ValidationError {
 public:
  explicit NumericError(const std::string& msg) : ValidationError(msg) {}
};

/// Filesystem and decode failures; carries the offending path in the message.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pantry
