// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace musa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (engine, provider, CLI flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Text that could not be deserialized; carries the byte offset of the fault.
class MalformedInputError : public Error {
 public:
  MalformedInputError(const std::string& what, std::size_t position)
      : Error(what + " (at byte " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// The planner's output did not contain a usable plan block.
class PlanParseError : public Error {
 public:
  PlanParseError(const std::string& reason, std::string raw)
      : Error("plan-parse error: " + reason), reason_(reason), raw_(std::move(raw)) {}

  const std::string& reason() const noexcept { return reason_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string reason_;
  std::string raw_;
};

/// The critic's output lacked the mandatory verdict line.
class CritiqueParseError : public Error {
 public:
  CritiqueParseError(const std::string& reason, std::string raw)
      : Error("critique-parse error: " + reason), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

/// An actor completion could not be mapped to the action's result grammar.
class ActionParseError : public Error {
 public:
  using Error::Error;
};

/// Data file (dataset, tool store, taxonomy) with a format fault.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace musa
