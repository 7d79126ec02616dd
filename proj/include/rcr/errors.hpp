#pragma once

#include <stdexcept>
#include <string>

namespace rcr {

// Malformed input text (UAI model, evidence file, trace).
struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input outside the supported model class
// (cardinality < 2, non-binary variable under a binary-only update, ...).
struct unsupported_error : std::runtime_error {
    explicit unsupported_error(const std::string& msg) : std::runtime_error(msg) {}
};

// API precondition violated by the caller.
struct contract_error : std::logic_error {
    explicit contract_error(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace rcr
