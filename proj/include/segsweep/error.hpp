#pragma once

#include <stdexcept>
#include <string>

namespace segsweep {

// Malformed input documents (manifest JSON, raster headers, CSV).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed an out-of-contract argument (threshold outside (0,1], ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Inconsistent run configuration (subset region without a subset range, mixed grids).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A quantity has no defined value for the given inputs (zero denominator,
// no comparable sections, degenerate sample).
class UndefinedError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace segsweep
