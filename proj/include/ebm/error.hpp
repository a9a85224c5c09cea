#pragma once

#include <stdexcept>
#include <string>

namespace ebm {

class Error : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV content, schema mismatch, bad target).
class DataError : public Error {
public:
   using Error::Error;
};

/// Invalid hyperparameter value. field() names the offending TrainConfig field.
class ConfigError : public Error {
public:
   ConfigError(std::string field, const std::string & message)
      : Error(field + ": " + message), m_field(std::move(field)) {}

   const std::string & field() const noexcept { return m_field; }

private:
   std::string m_field;
};

/// Model file that cannot be read: unknown version, schema violation, non-finite value.
class FormatError : public Error {
public:
   using Error::Error;
};

class TrainError : public Error {
public:
   using Error::Error;
};

/// Reference to a term or row that does not exist.
class NotFoundError : public Error {
public:
   using Error::Error;
};

} // namespace ebm
