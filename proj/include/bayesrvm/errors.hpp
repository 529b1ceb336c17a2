#ifndef BAYESRVM_ERRORS_HPP
#define BAYESRVM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bayesrvm {

// Error taxonomy shared by the whole library. The CLI maps these onto
// process exit codes: input/config -> 1, numerical -> 2, I/O -> 3.

struct input_error : std::runtime_error {
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bayesrvm

#endif  // BAYESRVM_ERRORS_HPP
