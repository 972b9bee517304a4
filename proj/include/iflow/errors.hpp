#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iflow {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error { public: using Error::Error; };
class EmptyMask : public Error { public: using Error::Error; };
class OutOfBounds : public Error { public: using Error::Error; };
class DimsMismatch : public Error { public: using Error::Error; };
class NoSamples : public Error { public: using Error::Error; };
class FrameOrderViolation : public Error { public: using Error::Error; };
class EmptyGroundTruth : public Error { public: using Error::Error; };
class SpecError : public Error { public: using Error::Error; };

// io
class IoError : public Error { public: using Error::Error; };
class UnsupportedFormat : public IoError { public: using IoError::IoError; };
class CorruptFile : public IoError { public: using IoError::IoError; };
class BadMagic : public IoError { public: using IoError::IoError; };
class TruncatedFile : public IoError { public: using IoError::IoError; };

class ParseError : public IoError {
public:
  ParseError(const std::string& what, std::size_t line)
      : IoError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  /// 1-based line number of the offending row.
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace iflow
