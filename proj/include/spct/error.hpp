#pragma once

#include <stdexcept>
#include <string>

namespace spct {

// Thrown when an argument or input violates an operation's contract
// (bad dimensions, out-of-range parameters, malformed structured input).
// The CLI maps this to exit code 2.
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown on filesystem / stream failures (missing file, truncated payload,
// unwritable output). The CLI maps this to exit code 3.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw contract_error(msg);
}

}  // namespace spct
