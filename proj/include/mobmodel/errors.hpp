#ifndef MOBMODEL_ERRORS_HPP
#define MOBMODEL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mobmodel {

// Error taxonomy, mirrored by the CLI exit codes:
//   UsageError      -> 1 (bad flags, missing files)
//   ValidationError -> 2 (an invariant of a loaded artifact is violated)
//   DataError       -> 3 (input data cannot support the requested operation)
class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unrecoverable problem with an input stream or document.
class ParseError : public DataError {
public:
  explicit ParseError(const std::string& msg) : DataError(msg) {}
};

}  // namespace mobmodel

#endif  // MOBMODEL_ERRORS_HPP
