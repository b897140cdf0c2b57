#pragma once

#include <stdexcept>
#include <string>

namespace vs {

// Bad user input: malformed polynomials, dimension mismatches, unsupported
// input classes. CLI maps this to exit code 2.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation that started from valid input failed numerically (all paths
// singular, empty normal locus, infinite bottleneck locus without override,
// iteration caps). CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A requested certificate could not be established. CLI maps this to exit
// code 4 when --require-certificate is set.
struct certificate_error : std::runtime_error {
    explicit certificate_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace vs
