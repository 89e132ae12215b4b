#pragma once

#include <stdexcept>
#include <string>

namespace kcp {

/// Base class for all errors raised by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or degenerate input data (bad CSV, dimension mismatch,
/// non-simplex input, all-identical sample, ...).
struct invalid_input : error {
    using error::error;
};

/// Structurally valid input for which the requested computation has no
/// solution (infeasible (d, min_seg_len) pair, uninformative penalty grid).
struct infeasible : error {
    using error::error;
};

}  // namespace kcp
