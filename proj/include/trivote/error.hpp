#ifndef TRIVOTE_ERROR_HPP
#define TRIVOTE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace trivote {

// Base of every error raised by the toolkit. The subclasses map onto the CLI
// exit codes: ConfigError -> 1, DataError -> 2, TrainingError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace trivote

#endif  // TRIVOTE_ERROR_HPP
