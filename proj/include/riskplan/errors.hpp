#pragma once

#include <stdexcept>
#include <string>

namespace riskplan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (unparseable JSON, wrong types).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a model invariant. The message
// names the offending field.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class PredictionError : public Error {
 public:
  using Error::Error;
};

class PlanningError : public Error {
 public:
  using Error::Error;
};

}  // namespace riskplan
