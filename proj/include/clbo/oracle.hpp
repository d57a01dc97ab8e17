#pragma once

#include <cstdint>
#include <string>

namespace clbo {

struct OracleOptions {
    /// Points per axis for the 1-D and 2-D grid searches.
    int grid = 4096;
    /// Random local-search starts for the 5-D and 6-D problems.
    int starts = 2000;
    std::uint64_t seed = 20240611;
};

/// Reference values computed independently of the library's closed forms:
/// benchmark minima by dense grids, separable 1-D minimization or multi-start
/// local search, and expected improvement by numerical quadrature of its
/// defining integral. Returned as deterministic, pretty-printed JSON.
std::string oracle_fixture(const OracleOptions& options = {});

}  // namespace clbo
