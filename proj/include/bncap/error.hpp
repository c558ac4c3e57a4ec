// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace bncap {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Caller supplied a value outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A caption exceeds the model's maximum length.
class SequenceTooLong : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class FormatErrc {
  bad_magic,
  bad_dimension,
  truncated,
  trailing_data,
  non_finite,
  duplicate_id,
  malformed_line,
  unknown_tensor,
  missing_tensor,
  shape_mismatch,
  version_mismatch,
  bad_header,
  io,
};

const char* to_string(FormatErrc code);

/// A file on disk does not follow its documented layout.
class FormatError : public Error {
 public:
  FormatError(FormatErrc code, const std::string& detail)
      : Error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  FormatErrc code() const noexcept { return code_; }

 private:
  FormatErrc code_;
};

/// Training produced a non-finite loss or was given no data.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace bncap
