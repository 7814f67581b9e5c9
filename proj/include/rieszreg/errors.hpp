#pragma once

#include <stdexcept>
#include <string>

namespace rieszreg {

// Bad configuration or argument values (CLI exit code 2).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Unreadable or malformed input data (CLI exit code 3).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A representer evaluation left the loss domain, either on input data or
// mid-optimization (the train-loss-hacking regime). CLI exit code 4.
struct FitDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rieszreg
