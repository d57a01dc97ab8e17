#include "clbo/sampling.hpp"

#include "clbo/errors.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace clbo {

Matrix latin_hypercube(int n, int dimension, Rng& rng) {
    require(n >= 1 && dimension >= 1, "latin_hypercube: n and dimension must be positive");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix points(n, dimension);
    std::vector<int> strata(static_cast<std::size_t>(n));
    for (int h = 0; h < dimension; ++h) {
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        for (int i = 0; i < n; ++i) {
            points(i, h) = (strata[static_cast<std::size_t>(i)] + unit(rng)) / n;
        }
    }
    return points;
}

Vector uniform_point(int dimension, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector x(dimension);
    for (int h = 0; h < dimension; ++h) {
        x[h] = unit(rng);
    }
    return x;
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq sequence{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                           static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x434c424fU};
    return Rng(sequence);
}

}  // namespace clbo
