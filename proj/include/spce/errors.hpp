#pragma once

#include <stdexcept>
#include <string>

namespace spce {

// Base for every error the toolkit raises; the CLI catches this one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

class UnknownModel : public Error {
 public:
  explicit UnknownModel(const std::string& what) : Error(what) {}
};

class UnsortedStream : public Error {
 public:
  explicit UnsortedStream(const std::string& what) : Error(what) {}
};

class EmptyEstimate : public Error {
 public:
  explicit EmptyEstimate(const std::string& what) : Error(what) {}
};

class MissingTimestamps : public Error {
 public:
  explicit MissingTimestamps(const std::string& what) : Error(what) {}
};

class EmptySample : public Error {
 public:
  explicit EmptySample(const std::string& what) : Error(what) {}
};

class DegenerateSequence : public Error {
 public:
  explicit DegenerateSequence(const std::string& what) : Error(what) {}
};

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& what) : Error(what) {}
};

class TooShort : public Error {
 public:
  explicit TooShort(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(what) {}
};

}  // namespace spce
