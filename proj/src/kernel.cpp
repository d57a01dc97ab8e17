#include "clbo/kernel.hpp"

#include "clbo/errors.hpp"

#include <cmath>

namespace clbo {

double se_correlation(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& x2, const Vector& lengthscales) {
    double scaled = 0.0;
    for (Eigen::Index h = 0; h < x.size(); ++h) {
        const double diff = (x[h] - x2[h]) / lengthscales[h];
        scaled += diff * diff;
    }
    return std::exp(-0.5 * scaled);
}

double se_kernel(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& x2, const SogpParams& params) {
    if (x.size() != x2.size() || x.size() != params.lengthscales.size()) {
        throw ContractViolation("se_kernel: dimension mismatch between points and lengthscales");
    }
    return params.signal_variance * se_correlation(x, x2, params.lengthscales);
}

Matrix build_gram(const Matrix& inputs, const SogpParams& params) {
    require(inputs.rows() >= 1, "build_gram: need at least one row");
    require(inputs.cols() == params.lengthscales.size(), "build_gram: dimension mismatch");
    const Eigen::Index n = inputs.rows();
    Matrix gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = params.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double value = se_kernel(inputs.row(i).transpose(), inputs.row(j).transpose(), params);
            gram(i, j) = value;
            gram(j, i) = value;
        }
    }
    return gram;
}

Matrix cross_correlation(const Matrix& a, const Matrix& b, const Vector& lengthscales) {
    require(a.cols() == b.cols() && a.cols() == lengthscales.size(), "cross_correlation: dimension mismatch");
    Matrix out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            out(i, j) = se_correlation(a.row(i).transpose(), b.row(j).transpose(), lengthscales);
        }
    }
    return out;
}

Vector correlation_vector(const Eigen::Ref<const Vector>& x, const Matrix& rows, const Vector& lengthscales) {
    require(x.size() == rows.cols() && x.size() == lengthscales.size(), "correlation_vector: dimension mismatch");
    const Vector inverse = lengthscales.cwiseInverse();
    const Matrix scaled_rows = rows * inverse.asDiagonal();
    const Vector scaled_x = x.cwiseProduct(inverse);
    Vector out(rows.rows());
    for (Eigen::Index j = 0; j < rows.rows(); ++j) {
        out[j] = std::exp(-0.5 * (scaled_rows.row(j).transpose() - scaled_x).squaredNorm());
    }
    return out;
}

}  // namespace clbo
