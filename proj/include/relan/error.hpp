#pragma once

#include <stdexcept>
#include <string>

namespace relan {

// Base error for every failure the library reports. Messages name the
// offending input (triple, label, line) so callers can surface them directly.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace relan
