#pragma once

#include <stdexcept>
#include <string>

namespace duo {

/// Raised for malformed inputs: bad probabilities, alphabet mismatches,
/// unknown config keys, oversized enumerations.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace duo
