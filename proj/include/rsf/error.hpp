#pragma once

#include <stdexcept>
#include <string>

namespace rsf {

/// Caller passed arguments that violate a documented precondition.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A set reduction was asked to operate on zero elements.
class EmptySetError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Normalization statistics are undefined (e.g. BN over one position).
class DegenerateStatistics : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input bytes: wrong magic, truncated payload, bad header.
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ChecksumError : public FormatError {
  public:
    using FormatError::FormatError;
};

class VersionError : public FormatError {
  public:
    using FormatError::FormatError;
};

/// A value became NaN or infinite during a computation.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace rsf
