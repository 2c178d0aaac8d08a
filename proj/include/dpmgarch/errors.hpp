#pragma once

#include <stdexcept>
#include <string>

namespace dpmgarch {

/// Malformed or inconsistent input data (bad file, non-positive price, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a valid result (non-PD matrix,
/// exhausted component cap, repeated sampler failures).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dpmgarch
