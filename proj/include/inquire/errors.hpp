#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace inquire {

// Base for every error raised by this library. Callers that only need to
// distinguish "our" failures from std::bad_alloc and friends catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text that is not a member of the augmented action grammar. `offset` and
// `length` locate the offending token inside the input (length 0 means the
// input ended early).
class MalformedAction : public Error {
 public:
  MalformedAction(std::string message, std::size_t offset = 0, std::size_t length = 0)
      : Error(std::move(message)), offset_(offset), length_(length) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t length() const noexcept { return length_; }

 private:
  std::size_t offset_;
  std::size_t length_;
};

class EpisodeFinished : public Error {
 public:
  EpisodeFinished() : Error("episode already finished") {}
};

class UnsatisfiableTask : public Error {
 public:
  using Error::Error;
};

class ParamOutOfRange : public Error {
 public:
  using Error::Error;
};

class AmbiguousRank : public Error {
 public:
  using Error::Error;
};

class EmptyCandidates : public Error {
 public:
  EmptyCandidates() : Error("candidate set is empty") {}
};

class NonPositiveScore : public Error {
 public:
  using Error::Error;
};

class NonFiniteScore : public Error {
 public:
  using Error::Error;
};

class EmptyGroup : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class PolicyParseFailure : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace inquire
