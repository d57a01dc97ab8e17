#include "clbo/acquisition.hpp"

#include "clbo/errors.hpp"
#include "clbo/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace clbo {
namespace {

constexpr double kInvSqrtTwoPi = 0.39894228040143267793994605993438;
constexpr double kInvSqrtTwo = 0.70710678118654752440084436210485;

double normal_pdf(double z) { return kInvSqrtTwoPi * std::exp(-0.5 * z * z); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrtTwo); }

}  // namespace

double expected_improvement(double mean, double variance, double f_min) {
    require(variance >= 0.0, "expected_improvement: negative variance");
    const double sigma = std::sqrt(variance);
    const double gap = f_min - mean;
    if (sigma < 1e-12) {
        return std::max(gap, 0.0);
    }
    const double z = gap / sigma;
    return std::max(gap * normal_cdf(z) + sigma * normal_pdf(z), 0.0);
}

double ei_z(double mean, double variance, double f_min) {
    if (!(variance > 0.0)) {
        throw ContractViolation("ei_z: z is undefined for non-positive variance");
    }
    return (f_min - mean) / std::sqrt(variance);
}

Regime classify_z(double z) {
    if (std::isnan(z)) {
        return Regime::Undefined;
    }
    if (z > 3.0) {
        return Regime::OverExploitation;
    }
    if (z < -3.0) {
        return Regime::OverExploration;
    }
    return Regime::Balanced;
}

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::Balanced: return "balanced";
        case Regime::OverExploitation: return "over_exploitation";
        case Regime::OverExploration: return "over_exploration";
        case Regime::Undefined: return "undefined";
    }
    return "undefined";
}

double influence_function(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& anchor,
                          const Vector& lengthscales) {
    require(x.size() == anchor.size() && x.size() == lengthscales.size(), "influence_function: dimension mismatch");
    double scaled = 0.0;
    for (Eigen::Index h = 0; h < x.size(); ++h) {
        const double diff = x[h] - anchor[h];
        scaled += diff * diff / (2.0 * lengthscales[h] * lengthscales[h]);
    }
    // -expm1 keeps precision for points very close to the anchor.
    return -std::expm1(-scaled);
}

double pseudo_expected_improvement(const Posterior& posterior, double f_min, const Eigen::Ref<const Vector>& x,
                                   const Eigen::Ref<const Vector>& anchor, const Vector& lengthscales) {
    return expected_improvement(posterior.mean, posterior.variance, f_min) *
           influence_function(x, anchor, lengthscales);
}

int AcquisitionConfig::effective_starts(int dimension) const {
    return starts > 0 ? starts : std::min(20 * dimension, 200);
}

AcquisitionMaximum maximize_acquisition(const PlainObjective& acquisition, const Bounds& bounds,
                                        const AcquisitionConfig& config, Rng& rng, std::span<const Vector> seeds) {
    bounds.validate();
    const int d = bounds.dimension();
    const int n_lhs = config.effective_starts(d);
    require(n_lhs >= 1, "maximize_acquisition: need at least one start");

    std::vector<Vector> candidates;
    candidates.reserve(static_cast<std::size_t>(n_lhs) + seeds.size());
    const Matrix design = latin_hypercube(n_lhs, d, rng);
    for (int i = 0; i < n_lhs; ++i) {
        candidates.push_back(bounds.from_unit(design.row(i).transpose()));
    }
    for (const auto& seed : seeds) {
        require(seed.size() == d, "maximize_acquisition: seed point has wrong dimension");
        candidates.push_back(seed.cwiseMax(bounds.lower).cwiseMin(bounds.upper));
    }

    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double value = acquisition(candidates[i]);
        scores[i] = std::isfinite(value) ? value : -std::numeric_limits<double>::infinity();
    }

    std::vector<std::size_t> order(static_cast<std::size_t>(n_lhs));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<std::size_t> refine(order.begin(),
                                    order.begin() + std::min<std::ptrdiff_t>(config.local_starts, n_lhs));
    for (std::size_t i = static_cast<std::size_t>(n_lhs); i < candidates.size(); ++i) {
        refine.push_back(i);
    }

    std::size_t best_index = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (scores[i] > scores[best_index]) {
            best_index = i;
        }
    }
    AcquisitionMaximum best{candidates[best_index], scores[best_index]};

    const PlainObjective negated = [&acquisition](const Vector& x) { return -acquisition(x); };
    SimplexOptions options;
    options.max_iterations = config.max_local_iterations;
    options.size_tolerance = config.local_tolerance;
    options.initial_step = config.initial_step;
    for (std::size_t index : refine) {
        const LocalResult local = minimize_simplex(negated, candidates[index], bounds.lower, bounds.upper, options);
        if (std::isfinite(local.value) && -local.value > best.value) {
            best = AcquisitionMaximum{local.x, -local.value};
        }
    }
    return best;
}

}  // namespace clbo
