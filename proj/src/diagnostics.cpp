#include "clbo/diagnostics.hpp"

#include "clbo/errors.hpp"

#include <cmath>

namespace clbo {

AmbiguityDecomposition ambiguity_decomposition(std::span<const double> predictions, std::span<const double> weights,
                                               double truth) {
    require(!predictions.empty(), "ambiguity_decomposition: no predictions");
    require(predictions.size() == weights.size(), "ambiguity_decomposition: one weight per prediction required");
    double total = 0.0;
    for (double w : weights) {
        require(w >= 0.0 && std::isfinite(w), "ambiguity_decomposition: weights must be non-negative");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-9, "ambiguity_decomposition: weights must sum to one");

    double combined = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        combined += weights[i] * predictions[i];
    }
    AmbiguityDecomposition out;
    out.ensemble_error = (combined - truth) * (combined - truth);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double err = predictions[i] - truth;
        const double spread = predictions[i] - combined;
        out.individual_error += weights[i] * err * err;
        out.diversity += weights[i] * spread * spread;
    }
    return out;
}

}  // namespace clbo
