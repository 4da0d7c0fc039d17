// Error taxonomy: invalid_argument for configuration and shape mistakes,
// IoError for file problems, NumericalError for solver breakdowns.

#pragma once

#include <stdexcept>
#include <string>

namespace corrtensor {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace corrtensor
