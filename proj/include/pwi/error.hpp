// Error taxonomy shared across the library. The CLI maps these onto
// process exit codes (config/usage -> 2, data -> 3, numeric -> 4).
#pragma once

#include <stdexcept>
#include <string>

namespace pwi {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor dimensions or layouts disagree.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Caller-supplied values violate an operation's preconditions.
class InputError : public Error {
public:
    using Error::Error;
};

// Bad configuration, including stale checkpoints vs. flipped flags.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unreadable or malformed data files.
class DataError : public Error {
public:
    using Error::Error;
};

// NaN/degenerate arithmetic, undefined statistics.
class NumericError : public Error {
public:
    using Error::Error;
};

// API misuse (backward on a consumed graph, non-scalar loss, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

}  // namespace pwi
