// Kuhn-Munkres assignment on a rectangular benefit matrix.

#pragma once

#include <vector>

namespace corrtensor {

// Maximum-benefit assignment. benefit[i][j] is the gain of pairing row i with
// column j; returns for each row the assigned column, or -1 when rows exceed
// columns and the row stays unmatched. O(n^3) augmenting-path implementation.
std::vector<int> assign_max_benefit(const std::vector<std::vector<double>>& benefit);

}  // namespace corrtensor
