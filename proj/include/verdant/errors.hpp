#pragma once

#include <stdexcept>

namespace verdant {

// Malformed files, streams or records. The CLI maps this to exit code 2;
// math-domain violations use std::domain_error (exit code 3).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace verdant
