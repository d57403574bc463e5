#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace beltrami {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid grid geometry or incompatible field shapes.
struct grid_error : error {
    using error::error;
};

/// A field value failed a finiteness or construction check.
struct field_error : error {
    using error::error;
};

/// Input to a transform is not compactly supported inside the grid margin.
struct support_error : error {
    support_error(std::string msg, std::vector<std::size_t> cells)
        : error(std::move(msg)), offending_cells(std::move(cells)) {}
    std::vector<std::size_t> offending_cells;
};

/// Coefficient violates |mu| < 1 or the compact-support requirement.
struct coefficient_error : error {
    using error::error;
};

/// Iterative solve failed to reach tolerance; carries the residual history.
struct convergence_error : error {
    convergence_error(std::string msg, std::vector<double> history)
        : error(std::move(msg)), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

/// Solution failed a regularity requirement (nonpositive Jacobian, vanishing f_z).
struct regularity_error : error {
    regularity_error(std::string msg, std::vector<std::size_t> cells = {})
        : error(std::move(msg)), offending_cells(std::move(cells)) {}
    std::vector<std::size_t> offending_cells;
};

/// Set-membership or admissibility violation for a variation direction.
struct constraint_error : error {
    constraint_error(std::string msg, std::vector<std::size_t> cells = {})
        : error(std::move(msg)), offending_cells(std::move(cells)) {}
    std::vector<std::size_t> offending_cells;
};

/// Evaluation requested at or too close to a kernel pole.
struct singularity_error : error {
    using error::error;
};

/// Functional degenerate: the gradient density vanishes where it must not.
struct degeneracy_error : error {
    using error::error;
};

/// Extremal search did not converge (iteration cap or oscillation).
struct extremal_error : error {
    using error::error;
};

/// Run-configuration parse or validation failure.
struct config_error : error {
    using error::error;
};

/// File-format or I/O failure.
struct io_error : error {
    using error::error;
};

} // namespace beltrami
