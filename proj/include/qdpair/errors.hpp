#pragma once

#include <stdexcept>
#include <string>

namespace qdpair {

/// Bad grid / schema / option combination.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Data cannot identify any state (e.g. all-zero counts in a window).
struct degenerate_data_error : std::runtime_error {
    explicit degenerate_data_error(const std::string& what) : std::runtime_error(what) {}
};

/// Input density matrix violates Hermiticity / trace / positivity tolerances.
struct invalid_state_error : std::runtime_error {
    explicit invalid_state_error(const std::string& what) : std::runtime_error(what) {}
};

/// Feature of interest is not resolved by the sampling grid.
struct undersampled_error : std::runtime_error {
    explicit undersampled_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qdpair
