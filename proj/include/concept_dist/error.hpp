#pragma once

#include <stdexcept>
#include <string>

namespace concept_dist {

/// Raised when input data violates a contract (bad file, bad value, degenerate
/// vector). The CLI maps it to exit code 1.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace concept_dist
