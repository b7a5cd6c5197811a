#ifndef IVAE_COMMON_ERRORS_H_
#define IVAE_COMMON_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ivae {

// Error categories raised by the core library. The C API maps each one to a
// distinct status code.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ivae

#endif  // IVAE_COMMON_ERRORS_H_
