#pragma once

#include <stdexcept>
#include <string>

namespace foam {

/// Operand shapes are incompatible (dimension or column-count mismatch).
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input is outside an operation's mathematical domain (zero divisor,
/// zero-norm vector, non-finite value, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A run configuration or manifest failed validation.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss or gradient.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, long step)
        : std::runtime_error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

}  // namespace foam
