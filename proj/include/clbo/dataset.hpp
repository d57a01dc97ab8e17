#pragma once

#include <Eigen/Dense>

#include <vector>

namespace clbo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box in raw problem coordinates.
struct Bounds {
    Vector lower;
    Vector upper;

    [[nodiscard]] int dimension() const { return static_cast<int>(lower.size()); }
    [[nodiscard]] Vector to_unit(const Vector& raw) const;
    [[nodiscard]] Vector from_unit(const Vector& unit) const;
    /// Throws ContractViolation unless lower < upper component-wise.
    void validate() const;

    static Bounds unit_cube(int dimension);
    static Bounds uniform(int dimension, double lower, double upper);
};

/// Affine map between raw objective values and zero-mean, unit-variance values.
class OutputTransform {
public:
    OutputTransform() = default;
    OutputTransform(double mean, double scale);

    /// Sample mean and standard deviation of `raw`; a constant vector gets scale 1.
    static OutputTransform fit(const Vector& raw);

    [[nodiscard]] double standardize(double raw) const { return (raw - mean_) / scale_; }
    [[nodiscard]] double destandardize(double value) const { return value * scale_ + mean_; }
    [[nodiscard]] Vector standardize(const Vector& raw) const;
    /// Variances scale with the square of the output scale.
    [[nodiscard]] double destandardize_variance(double variance) const { return variance * scale_ * scale_; }

    [[nodiscard]] double mean() const { return mean_; }
    [[nodiscard]] double scale() const { return scale_; }

private:
    double mean_ = 0.0;
    double scale_ = 1.0;
};

/// Training data for a GP: inputs in the unit cube, standardized outputs.
struct Dataset {
    Matrix inputs;   // n x d
    Vector outputs;  // standardized
    OutputTransform transform;

    /// Standardizes `raw_outputs` with a transform fitted on them.
    static Dataset from_raw(Matrix unit_inputs, const Vector& raw_outputs);
    /// Standardizes `raw_outputs` with an externally supplied transform.
    static Dataset with_transform(Matrix unit_inputs, const Vector& raw_outputs, const OutputTransform& transform);

    [[nodiscard]] int size() const { return static_cast<int>(inputs.rows()); }
    [[nodiscard]] int dimension() const { return static_cast<int>(inputs.cols()); }
    [[nodiscard]] Vector raw_outputs() const;
    /// Throws ContractViolation if n < 1, sizes disagree or an input leaves [0,1].
    void validate() const;
};

/// Indices of the first occurrence of every distinct row, in order.
std::vector<int> unique_row_indices(const Matrix& rows);

/// Drops exact duplicate input rows, keeping the first occurrence.
Dataset deduplicate(const Dataset& data);

Matrix select_rows(const Matrix& rows, const std::vector<int>& indices);
Vector select_entries(const Vector& values, const std::vector<int>& indices);

}  // namespace clbo
