#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sfec {

/// Operand lengths disagree (regressor vs. weights, channel vs. regressor).
class DimensionMismatch : public std::invalid_argument {
public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                                ", got " + std::to_string(got)),
          expected_(expected), got_(got) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t got() const noexcept { return got_; }

private:
    std::size_t expected_;
    std::size_t got_;
};

/// A filter weight became NaN/Inf during an update.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what, std::size_t iteration = 0)
        : std::runtime_error(what), iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// Step-size outside the mean-square stability region of a closed-form result.
class StabilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative numeric procedure ran out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Invalid parameter or configuration value.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace sfec
