#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace speckle {

/// Argument outside the domain of a density, moment or estimator.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Result not representable as a finite double.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// One or more structural invariants violated (layouts, specs, file formats).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> violations);
    explicit ValidationError(const std::string& violation)
        : ValidationError(std::vector<std::string>{violation}) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

}  // namespace speckle
