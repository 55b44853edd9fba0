#pragma once

#include <stdexcept>
#include <string>

namespace newsbias {

// Base class for all errors raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input did not match a documented schema. `field` names the offending field
// as a dotted path, e.g. "articles[3].outlet_orientation".
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string &what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string &field() const { return field_; }

 private:
  std::string field_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// A request that conflicts with existing state (duplicate ids, duplicate
// responses).
class ConflictError : public Error {
 public:
  using Error::Error;
};

}  // namespace newsbias
