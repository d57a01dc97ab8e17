#pragma once

#include <span>

namespace clbo {

/// Squared-error decomposition of a weighted ensemble at one point:
/// ensemble_error = individual_error - diversity.
struct AmbiguityDecomposition {
    double ensemble_error = 0.0;    // (sum_i w_i p_i - y)^2
    double individual_error = 0.0;  // sum_i w_i (p_i - y)^2
    double diversity = 0.0;         // sum_i w_i (p_i - p_bar)^2
};

/// Throws ContractViolation unless weights are non-negative, match the
/// prediction count and sum to one (within 1e-9).
AmbiguityDecomposition ambiguity_decomposition(std::span<const double> predictions, std::span<const double> weights,
                                               double truth);

}  // namespace clbo
