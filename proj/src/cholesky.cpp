#include "clbo/cholesky.hpp"

#include "clbo/errors.hpp"

namespace clbo {

std::optional<CholeskyModel> CholeskyModel::try_factor(const Matrix& covariance, const Vector& targets,
                                                       const JitterLadder& ladder) {
    if (covariance.rows() != covariance.cols() || covariance.rows() != targets.size()) {
        throw ContractViolation("CholeskyModel: covariance/targets shape mismatch");
    }
    if (!covariance.allFinite()) {
        return std::nullopt;
    }
    CholeskyModel model;
    model.targets_ = targets;
    double jitter = 0.0;
    while (true) {
        if (jitter == 0.0) {
            model.llt_.compute(covariance);
        } else {
            Matrix shifted = covariance;
            shifted.diagonal().array() += jitter;
            model.llt_.compute(shifted);
        }
        if (model.llt_.info() == Eigen::Success) {
            break;
        }
        jitter = jitter == 0.0 ? ladder.first : jitter * ladder.factor;
        if (jitter > ladder.last * (1.0 + 1e-9)) {
            return std::nullopt;
        }
    }
    model.jitter_ = jitter;
    model.alpha_ = model.llt_.solve(targets);
    return model;
}

CholeskyModel CholeskyModel::factor(const Matrix& covariance, const Vector& targets, const JitterLadder& ladder) {
    auto model = try_factor(covariance, targets, ladder);
    if (!model) {
        throw IllConditionedModel("covariance matrix is not positive definite after maximum jitter");
    }
    return std::move(*model);
}

double CholeskyModel::log_determinant() const {
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Vector CholeskyModel::half_solve(const Vector& rhs) const { return llt_.matrixL().solve(rhs); }

Matrix CholeskyModel::inverse() const { return llt_.solve(Matrix::Identity(size(), size())); }

double CholeskyModel::data_fit() const { return targets_.dot(alpha_); }

}  // namespace clbo
