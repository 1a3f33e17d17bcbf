#pragma once

#include <stdexcept>
#include <string>

namespace treid {

// Error taxonomy used across the library. The CLI maps these onto exit
// codes: argument/data errors -> 2, numeric errors -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller passed a structurally invalid argument (bad mode index, shape
// mismatch, divisibility violation, ...).
class ArgumentError : public Error {
public:
    explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

// Input data cannot support the requested computation (no cross-view
// pairs, open-set probe, too few identities, unreadable file, ...).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// A numeric procedure failed (factorization breakdown, iteration cap).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg, long iterations = -1)
        : Error(msg), iterations_(iterations) {}

    // Iteration count at failure, or -1 when not applicable.
    long iterations() const { return iterations_; }

private:
    long iterations_;
};

}  // namespace treid
