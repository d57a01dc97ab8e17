#pragma once

#include "clbo/dataset.hpp"

namespace clbo {

/// Hyperparameters of the single-output squared-exponential GP.
///
/// `lengthscales` holds the characteristic lengths l_h in normalized input
/// units; the kernel divides squared distances by l_h^2.
struct SogpParams {
    Vector lengthscales;
    double signal_variance = 1.0;
    double noise_variance = 1e-6;

    [[nodiscard]] int dimension() const { return static_cast<int>(lengthscales.size()); }
};

/// Unit-amplitude SE correlation exp(-0.5 * sum_h (x_h - x2_h)^2 / l_h^2).
double se_correlation(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& x2, const Vector& lengthscales);

/// sigma_f^2 * se_correlation(x, x2). Throws ContractViolation on dimension mismatch.
double se_kernel(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& x2, const SogpParams& params);

/// Noise-free Gram matrix K with K(i,j) = se_kernel(x_i, x_j). Each pair is
/// evaluated once and mirrored, so the result is exactly symmetric.
Matrix build_gram(const Matrix& inputs, const SogpParams& params);

/// Unit-amplitude cross-correlation matrix between the rows of `a` and `b`.
Matrix cross_correlation(const Matrix& a, const Matrix& b, const Vector& lengthscales);

/// Unit-amplitude correlations between a single point and every row of `rows`.
Vector correlation_vector(const Eigen::Ref<const Vector>& x, const Matrix& rows, const Vector& lengthscales);

}  // namespace clbo
