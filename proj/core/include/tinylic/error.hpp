#pragma once

#include <stdexcept>
#include <string>

namespace tinylic {

// Every failure the library reports derives from Error so callers can catch
// one type; the CLI maps the concrete types to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input spatial dims not divisible by the transform's total stride.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

// Container / weight-file format errors.
class FormatError : public Error {
 public:
  using Error::Error;
};

class BadMagic : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedVersion : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedStream : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class DuplicateName : public FormatError {
 public:
  using FormatError::FormatError;
};

class ModelMismatch : public Error {
 public:
  using Error::Error;
};

class MinSizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace tinylic
