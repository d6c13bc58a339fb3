#pragma once

#include <stdexcept>
#include <string>

namespace evspec {

// Raised when an algorithm detects numerical breakdown (residual checks,
// non-convergence, root-selection ambiguity). Domain/parameter violations use
// std::domain_error / std::invalid_argument instead.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace evspec
