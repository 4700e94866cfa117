#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace molgen {

/// Root of the project exception hierarchy.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IOError : public Error {
public:
  explicit IOError(const std::string& msg) : Error("io error: " + msg) {}
};

class DataError : public Error {
public:
  explicit DataError(const std::string& msg) : Error("data error: " + msg) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& msg) : Error("numerical error: " + msg) {}
};

/// Process exit codes used by the command line tools.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

}  // namespace molgen
