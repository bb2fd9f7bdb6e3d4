#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtk {

/// Base of every error thrown by the library. The CLI maps these to exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed Standard MIDI File.
class MidiParseError : public Error {
 public:
  MidiParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Ungrammatical token sequence.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t index)
      : Error(what + " (at token " + std::to_string(index) + ")"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace mtk
