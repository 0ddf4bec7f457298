#pragma once

#include <stdexcept>
#include <string>

namespace nlresp {

// Argument outside the mathematical domain (negative time, bad level index).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Evaluation requested beyond tabulated data.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Malformed input data (non-uniform table, bad CSV, mixed units).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Pathway the requested approximation is not defined for.
class UnsupportedPathway : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace nlresp
