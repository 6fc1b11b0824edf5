#pragma once

#include <stdexcept>
#include <string>

namespace aml {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A JSONL/CSV record failed validation. `field()` names the offending field
/// (empty for whole-record failures such as malformed JSON).
class ParseError : public Error {
 public:
  enum class Kind { MalformedJson, MissingField, InvalidField, NegativeAmount, NonNumericTimestamp };

  ParseError(Kind kind, std::string field, const std::string& message)
      : Error(message), kind_(kind), field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

}  // namespace aml
