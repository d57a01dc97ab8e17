#pragma once

#include "clbo/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace clbo::detail {

// Independent random streams per run seed.
enum Stream : std::uint64_t {
    kDesignStream = 1,
    kFitStream = 2,
    kAcquisitionStream = 3,
    kExchangeStream = 4,
    kFailureStream = 5,
    kBootstrapStream = 6,
    kAmbiguityStream = 7,
};

inline double z_or_nan(const Posterior& p, double f_min) {
    return p.variance > 0.0 ? ei_z(p.mean, p.variance, f_min) : std::numeric_limits<double>::quiet_NaN();
}

inline QueryRecord to_query(const Candidate& candidate, const Evaluator::Outcome& outcome) {
    QueryRecord q;
    q.x = outcome.x;
    q.x_unit = outcome.x_unit;
    q.provenance = candidate.provenance;
    q.value = outcome.value;
    q.acquisition = candidate.acquisition;
    q.z = candidate.z;
    q.regime = candidate.regime;
    q.pei_invoked = candidate.pei_invoked;
    q.substituted = outcome.substituted;
    return q;
}

/// Fills the trailing fields of a result from the evaluation history.
void finish_result(OptimizationResult& result, const BenchmarkProblem& problem, const Matrix& unit_inputs,
                   const Vector& values, int evaluation_failures, std::chrono::steady_clock::time_point started);

}  // namespace clbo::detail
