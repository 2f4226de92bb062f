#ifndef MSGWR_ERRORS_H
#define MSGWR_ERRORS_H

#include <stdexcept>
#include <string>

namespace msgwr {

// Bad input data: malformed files, non-finite values, rank deficiency.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Out-of-contract argument values (alpha outside [0,1], k out of range, ...).
struct parameter_error : std::runtime_error {
    explicit parameter_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Calibration failed: every candidate infeasible, empty neighborhood, ...
struct calibration_error : std::runtime_error {
    explicit calibration_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric breakdown at a specific point (singular local system, ...).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace msgwr

#endif
