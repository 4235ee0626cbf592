#include "srland/errors.hpp"

namespace srland {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const usage_error*>(&e)) return 1;
    if (dynamic_cast<const io_error*>(&e)) return 2;
    if (dynamic_cast<const numeric_error*>(&e)) return 3;
    if (dynamic_cast<const connectivity_error*>(&e)) return 4;
    return 1;
}

}  // namespace srland
