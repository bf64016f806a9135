#pragma once

#include <stdexcept>
#include <string>

namespace eitnet {

/// Linear solve or factorization failure.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Data not realizable by a positive network (raised by layer peeling).
class InconsistentData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace eitnet
