#pragma once

#include "clbo/sogp.hpp"

namespace clbo {

/// n points in [0,1]^d, one per stratum along every axis, uniformly jittered
/// within each stratum.
Matrix latin_hypercube(int n, int dimension, Rng& rng);

/// Uniform point in [0,1]^d.
Vector uniform_point(int dimension, Rng& rng);

/// Independent generator for a named sub-stream of a run seed.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

}  // namespace clbo
