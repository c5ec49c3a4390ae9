#pragma once

#include <stdexcept>
#include <string>

namespace mcuq {

// Error taxonomy mirrors the CLI exit codes: usage -> 1, io/format/validation
// (bad input data) -> 2, semantic (request impossible for this input) -> 3.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or unwritable paths.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Structurally broken input: bad magic, malformed header, truncated payload.
struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Structurally sound input carrying invalid values (out-of-range probability,
// row sum off the simplex, label index >= C).
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Valid input, but the requested computation needs something it lacks
// (typically labels).
struct SemanticError : Error {
    explicit SemanticError(const std::string& msg) : Error(msg) {}
};

// Bad command-line invocation.
struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

}  // namespace mcuq
