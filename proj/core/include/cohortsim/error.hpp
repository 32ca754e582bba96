#pragma once

#include <stdexcept>
#include <string>

namespace cohortsim {

/// Malformed input text (network file, config, CSV).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a model invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cohortsim
