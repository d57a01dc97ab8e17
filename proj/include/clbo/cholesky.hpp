#pragma once

#include "clbo/dataset.hpp"

#include <optional>

namespace clbo {

/// Jitter ladder applied on factorization failure: first no jitter, then
/// 1e-10, 1e-9, ..., 1e-4 added to the diagonal.
struct JitterLadder {
    double first = 1e-10;
    double last = 1e-4;
    double factor = 10.0;
};

/// Cholesky factorization of a covariance matrix plus the cached solve
/// against the training targets.
class CholeskyModel {
public:
    /// Factorizes `covariance` (escalating jitter as needed) and solves against
    /// `targets`. Throws IllConditionedModel if even the largest jitter fails.
    static CholeskyModel factor(const Matrix& covariance, const Vector& targets, const JitterLadder& ladder = {});

    /// Same as factor() but returns nullopt instead of throwing.
    static std::optional<CholeskyModel> try_factor(const Matrix& covariance, const Vector& targets,
                                                   const JitterLadder& ladder = {});

    [[nodiscard]] int size() const { return static_cast<int>(alpha_.size()); }
    [[nodiscard]] double jitter() const { return jitter_; }
    /// (K + jitter I)^{-1} y
    [[nodiscard]] const Vector& alpha() const { return alpha_; }
    [[nodiscard]] Matrix lower() const { return llt_.matrixL(); }
    [[nodiscard]] double log_determinant() const;
    [[nodiscard]] Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }
    /// L^{-1} rhs, so that rhs^T K^{-1} rhs = ||result||^2.
    [[nodiscard]] Vector half_solve(const Vector& rhs) const;
    [[nodiscard]] Matrix inverse() const;
    /// y^T K^{-1} y for the cached targets.
    [[nodiscard]] double data_fit() const;

private:
    CholeskyModel() = default;

    Eigen::LLT<Matrix> llt_;
    Vector targets_;
    Vector alpha_;
    double jitter_ = 0.0;
};

}  // namespace clbo
