#pragma once

#include "clbo/cholesky.hpp"
#include "clbo/dataset.hpp"
#include "clbo/kernel.hpp"

#include <random>
#include <span>

namespace clbo {

using Rng = std::mt19937_64;

/// Predictive distribution at one point, in standardized output units.
struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

struct Interval {
    double lower;
    double upper;
};

/// Search box for hyperparameters (natural units; searched in log space).
struct HyperBounds {
    Interval lengthscale{1e-3, 10.0};
    Interval signal_variance{1e-4, 1e2};
    Interval noise_variance{1e-8, 1.0};
};

/// Noise variance never goes below this (standardized units).
inline constexpr double kNoiseFloor = 1e-8;

struct FitConfig {
    /// Random starts drawn on top of the default start and any explicit starts.
    int starts = 10;
    int max_iterations = 100;
    double gradient_tolerance = 1e-5;
    /// When false the noise variance is pinned at `bounds.noise_variance.lower`.
    bool learn_noise = true;
    /// When false the built-in default start point is not used.
    bool include_default_start = true;
    HyperBounds bounds{};
};

/// NLML and its gradient with respect to the log-hyperparameter vector.
struct NlmlValue {
    double value = 0.0;
    Vector gradient;
};

/// Log-space packing used by the optimizer: [log l_1..log l_d, log sf2, log sn2].
Vector pack_sogp(const SogpParams& params);
SogpParams unpack_sogp(const Vector& packed);

/// Cholesky of K + sn2 I for the given data and parameters.
CholeskyModel factor_sogp(const Dataset& data, const SogpParams& params);

/// 0.5 y^T (K + sn2 I)^{-1} y + 0.5 log|K + sn2 I| + n/2 log(2 pi).
double sogp_nlml(const Dataset& data, const SogpParams& params);

/// NLML plus its analytic gradient in the packed log space.
NlmlValue sogp_nlml_with_gradient(const Dataset& data, const SogpParams& params);

/// Multi-start bounded quasi-Newton search over log-hyperparameters.
/// Duplicate inputs are merged first; `extra_starts` are always tried.
SogpParams fit_sogp(const Dataset& data, const FitConfig& config, Rng& rng,
                    std::span<const SogpParams> extra_starts = {});

/// A fitted single-output GP. Immutable after construction.
class SogpModel {
public:
    /// Conditions on `data` (duplicates merged) with fixed hyperparameters.
    SogpModel(const Dataset& data, SogpParams params);

    static SogpModel fit(const Dataset& data, const FitConfig& config, Rng& rng,
                         std::span<const SogpParams> extra_starts = {});

    [[nodiscard]] Posterior predict(const Eigen::Ref<const Vector>& x) const;
    [[nodiscard]] const SogpParams& params() const { return params_; }
    [[nodiscard]] const Dataset& data() const { return data_; }
    [[nodiscard]] const CholeskyModel& cholesky() const { return cholesky_; }

private:
    Dataset data_;
    SogpParams params_;
    CholeskyModel cholesky_;
};

}  // namespace clbo
