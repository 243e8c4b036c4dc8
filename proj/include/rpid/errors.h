#pragma once

#include <stdexcept>
#include <string>

namespace rpid {

// Root of every error raised by the library. CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (negative time, bad index).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid model or configuration parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace rpid
