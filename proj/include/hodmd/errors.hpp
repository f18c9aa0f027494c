#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hodmd {

// Bad arguments: shapes, ranges, malformed files.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The data cannot be factorized as requested (e.g. zero matrix).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-fatal diagnostics collected along a pipeline run.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message)
{
    if (sink != nullptr) {
        sink->push_back(std::move(message));
    }
}

} // namespace hodmd
