#pragma once

#include <cstddef>
#include <vector>

namespace bdm {

struct Assignment {
    double cost = 0.0;
    /// row_to_col[i] is the column matched to row i.
    std::vector<std::size_t> row_to_col;
};

/// Minimum-cost perfect matching on an n x n row-major cost matrix
/// (Hungarian method with potentials, O(n^3)).
Assignment solve_assignment(const std::vector<double>& cost, std::size_t n);

} // namespace bdm
