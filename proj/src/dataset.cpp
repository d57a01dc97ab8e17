#include "clbo/dataset.hpp"

#include "clbo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace clbo {

Vector Bounds::to_unit(const Vector& raw) const {
    require(raw.size() == lower.size(), "Bounds::to_unit: dimension mismatch");
    return ((raw - lower).array() / (upper - lower).array()).matrix();
}

Vector Bounds::from_unit(const Vector& unit) const {
    require(unit.size() == lower.size(), "Bounds::from_unit: dimension mismatch");
    return (lower.array() + unit.array() * (upper - lower).array()).matrix();
}

void Bounds::validate() const {
    require(lower.size() > 0 && lower.size() == upper.size(), "Bounds: lower/upper size mismatch or empty");
    for (Eigen::Index h = 0; h < lower.size(); ++h) {
        require(std::isfinite(lower[h]) && std::isfinite(upper[h]) && lower[h] < upper[h],
                "Bounds: every lower bound must be finite and below its upper bound");
    }
}

Bounds Bounds::unit_cube(int dimension) { return uniform(dimension, 0.0, 1.0); }

Bounds Bounds::uniform(int dimension, double lower, double upper) {
    return Bounds{Vector::Constant(dimension, lower), Vector::Constant(dimension, upper)};
}

OutputTransform::OutputTransform(double mean, double scale) : mean_(mean), scale_(scale) {
    require(std::isfinite(mean) && std::isfinite(scale) && scale > 0.0, "OutputTransform: scale must be positive");
}

OutputTransform OutputTransform::fit(const Vector& raw) {
    require(raw.size() >= 1, "OutputTransform::fit: empty output vector");
    const double mean = raw.mean();
    double scale = 1.0;
    if (raw.size() > 1) {
        const double variance = (raw.array() - mean).square().sum() / static_cast<double>(raw.size() - 1);
        if (variance > 0.0 && std::sqrt(variance) > 1e-12 * std::max(1.0, std::abs(mean))) {
            scale = std::sqrt(variance);
        }
    }
    return OutputTransform(mean, scale);
}

Vector OutputTransform::standardize(const Vector& raw) const { return ((raw.array() - mean_) / scale_).matrix(); }

Dataset Dataset::from_raw(Matrix unit_inputs, const Vector& raw_outputs) {
    return with_transform(std::move(unit_inputs), raw_outputs, OutputTransform::fit(raw_outputs));
}

Dataset Dataset::with_transform(Matrix unit_inputs, const Vector& raw_outputs, const OutputTransform& transform) {
    Dataset data{std::move(unit_inputs), transform.standardize(raw_outputs), transform};
    data.validate();
    return data;
}

Vector Dataset::raw_outputs() const {
    return ((outputs.array() * transform.scale()) + transform.mean()).matrix();
}

void Dataset::validate() const {
    require(inputs.rows() >= 1, "Dataset: at least one row is required");
    require(inputs.rows() == outputs.size(), "Dataset: input rows and output length differ");
    require(inputs.cols() >= 1, "Dataset: inputs need at least one column");
    require(inputs.allFinite() && outputs.allFinite(), "Dataset: non-finite entry");
    require(inputs.minCoeff() >= 0.0 && inputs.maxCoeff() <= 1.0, "Dataset: inputs must lie in the unit cube");
}

std::vector<int> unique_row_indices(const Matrix& rows) {
    // Lexicographic ordering on exact coordinates; first occurrence wins.
    auto less = [&rows](int a, int b) {
        for (Eigen::Index h = 0; h < rows.cols(); ++h) {
            if (rows(a, h) != rows(b, h)) {
                return rows(a, h) < rows(b, h);
            }
        }
        return false;
    };
    std::map<int, int, decltype(less)> seen(less);
    std::vector<int> kept;
    kept.reserve(static_cast<std::size_t>(rows.rows()));
    for (int i = 0; i < static_cast<int>(rows.rows()); ++i) {
        if (seen.emplace(i, i).second) {
            kept.push_back(i);
        }
    }
    return kept;
}

Dataset deduplicate(const Dataset& data) {
    const auto kept = unique_row_indices(data.inputs);
    if (static_cast<int>(kept.size()) == data.size()) {
        return data;
    }
    return Dataset{select_rows(data.inputs, kept), select_entries(data.outputs, kept), data.transform};
}

Matrix select_rows(const Matrix& rows, const std::vector<int>& indices) {
    Matrix out(static_cast<Eigen::Index>(indices.size()), rows.cols());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out.row(static_cast<Eigen::Index>(k)) = rows.row(indices[k]);
    }
    return out;
}

Vector select_entries(const Vector& values, const std::vector<int>& indices) {
    Vector out(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out[static_cast<Eigen::Index>(k)] = values[indices[k]];
    }
    return out;
}

}  // namespace clbo
