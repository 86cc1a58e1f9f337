#pragma once

#include <stdexcept>
#include <string>

namespace visprompt {

// Bad data handed to an operation (wrong channel count, out-of-bounds rect, ...).
struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration value (even kernel size, alpha out of range, ...).
struct InvalidConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed serialized data. Carries the 1-based line number when known (0 otherwise).
struct ParseError : std::runtime_error {
    int line;
    explicit ParseError(const std::string& msg, int line_number = 0)
        : std::runtime_error(line_number > 0 ? "line " + std::to_string(line_number) + ": " + msg
                                             : msg),
          line(line_number) {}
};

// The configured external OCR command could not be run.
struct EngineUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An operation that needs at least one candidate got none.
struct NoCandidates : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A synthetic page spec violates its own invariants.
struct InvalidSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failure; message includes the offending path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A dialogue completion backend failed (network, bad response, ...).
struct ClientError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace visprompt
