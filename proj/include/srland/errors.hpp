#pragma once

#include <stdexcept>
#include <string>

namespace srland {

// Error taxonomy, mapped one-to-one onto CLI exit codes:
//   usage_error -> 1, io_error -> 2, numeric_error -> 3, connectivity_error -> 4.
// Coverage shortfalls are reported as a warning flag on the result, not an error.

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct connectivity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code_for(const std::exception& e);

}  // namespace srland
