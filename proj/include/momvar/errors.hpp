#pragma once

#include <stdexcept>
#include <string>

namespace momvar {

// Thrown when a numerical routine fails to meet its contract
// (quadrature non-convergence, optimizer failure, singular matrix, ...).
// Input/domain problems use std::invalid_argument instead.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace momvar
