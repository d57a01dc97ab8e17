#pragma once

#include "clbo/box_minimize.hpp"
#include "clbo/sogp.hpp"

#include <span>
#include <string_view>

namespace clbo {

/// Best observed objective and where it was observed.
struct Incumbent {
    double f_min = 0.0;
    Vector x_min;
};

/// Closed-form expected improvement for minimization. For sigma < 1e-12 it
/// degenerates to max(f_min - mean, 0).
double expected_improvement(double mean, double variance, double f_min);

/// z = (f_min - mean) / sigma. Throws ContractViolation when variance is not positive.
double ei_z(double mean, double variance, double f_min);

enum class Regime { Balanced, OverExploitation, OverExploration, Undefined };

/// z > 3 flags over-exploitation, z < -3 over-exploration. NaN gives Undefined.
Regime classify_z(double z);
std::string_view to_string(Regime regime);

/// 1 - exp(-sum_h (x_h - x*_h)^2 / (2 l_h^2)); zero exactly at the anchor.
double influence_function(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& anchor,
                          const Vector& lengthscales);

/// EI(x) * IF(x, anchor).
double pseudo_expected_improvement(const Posterior& posterior, double f_min, const Eigen::Ref<const Vector>& x,
                                   const Eigen::Ref<const Vector>& anchor, const Vector& lengthscales);

struct AcquisitionConfig {
    /// Latin-hypercube candidates; 0 means 20 * d capped at 200.
    int starts = 0;
    /// How many of the best candidates (plus every seed point) get refined locally.
    int local_starts = 5;
    int max_local_iterations = 200;
    double local_tolerance = 1e-7;
    double initial_step = 0.05;

    [[nodiscard]] int effective_starts(int dimension) const;
};

struct AcquisitionMaximum {
    Vector x;
    double value = 0.0;
};

/// Maximizes `acquisition` over `bounds`: Latin-hypercube candidates plus the
/// `seeds` (e.g. the incumbent) are scored, then the most promising ones are
/// refined with a bounded simplex search. Ties go to the earliest candidate.
AcquisitionMaximum maximize_acquisition(const PlainObjective& acquisition, const Bounds& bounds,
                                        const AcquisitionConfig& config, Rng& rng, std::span<const Vector> seeds = {});

}  // namespace clbo
