#pragma once

#include <stdexcept>
#include <string>

namespace tvkb {

// Exception families map one-to-one onto the CLI exit codes
// (1 validation, 2 audit, 3 numeric).

class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

class AuditError : public std::runtime_error {
 public:
  explicit AuditError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tvkb
