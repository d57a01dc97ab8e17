#pragma once

#include "clbo/sogp.hpp"

#include <vector>

namespace clbo {

/// Bootstrap subsets of one master dataset. All subsets share the master's
/// output transform so their standardized outputs are directly comparable.
struct SubsetCollection {
    std::vector<Dataset> subsets;

    [[nodiscard]] int count() const { return static_cast<int>(subsets.size()); }
    [[nodiscard]] int total_rows() const;
    [[nodiscard]] int dimension() const { return subsets.empty() ? 0 : subsets.front().dimension(); }
    [[nodiscard]] Matrix stacked_inputs() const;
    [[nodiscard]] Vector stacked_outputs() const;
    /// Row offset of subset `i` in the stacked system.
    [[nodiscard]] int offset(int i) const;
};

/// Row indices of one bootstrap draw: n draws with replacement from `n_rows`,
/// reduced to distinct rows of `rows` (first occurrence order). When the
/// master has at least two distinct rows the result is topped up to two.
std::vector<int> bootstrap_indices(const Matrix& rows, Rng& rng);

/// m independent deduplicated bootstrap subsets of `master`.
SubsetCollection bootstrap_subsets(const Dataset& master, int m, Rng& rng);

/// Hyperparameters of the multi-form GP.
///
/// Every output shares `shared_lengthscales`. The output covariance is
/// K^f = S R S with S = diag(sqrt(output_scales)) and R the correlation matrix
/// induced by `correlation_factor`, a unit lower-triangular matrix L with
/// R = N L L^T N, N = diag(L L^T)^{-1/2}.
struct MfgpParams {
    Vector shared_lengthscales;
    Vector output_scales;     // sigma_f,i^2
    Vector noise_variances;   // sigma_n,i^2
    Matrix correlation_factor;

    [[nodiscard]] int outputs() const { return static_cast<int>(output_scales.size()); }
    [[nodiscard]] int dimension() const { return static_cast<int>(shared_lengthscales.size()); }
    [[nodiscard]] Matrix correlation() const;
    /// K^f, i.e. the implied rho_ij.
    [[nodiscard]] Matrix output_covariance() const;

    /// Independent outputs (R = I) with the given SOGP parameters on every output.
    static MfgpParams from_sogp(const SogpParams& params, int outputs);
    /// Unit lower-triangular factor whose induced correlation equals `correlation`.
    static Matrix factor_for(const Matrix& correlation);
};

/// Packed log-space layout: [log l (d), log sf2 (m), log sn2 (m), strictly-lower L entries row-major].
Vector pack_mfgp(const MfgpParams& params);
MfgpParams unpack_mfgp(const Vector& packed, int dimension, int outputs);

/// K_M: block (i,j) = rho_ij * unit SE correlation between X_i and X_j, plus sigma_n,i^2 on block i's diagonal.
Matrix build_block_covariance(const SubsetCollection& subsets, const MfgpParams& params);

double mfgp_nlml(const SubsetCollection& subsets, const MfgpParams& params);
NlmlValue mfgp_nlml_with_gradient(const SubsetCollection& subsets, const MfgpParams& params);

/// Joint multi-start search over the shared lengthscales, scales, noises and correlation factor.
MfgpParams fit_mfgp(const SubsetCollection& subsets, const FitConfig& config, Rng& rng,
                    std::span<const MfgpParams> extra_starts = {});

struct MfgpPosterior {
    Vector means;
    Vector variances;
};

/// A fitted multi-form GP. Immutable after construction.
class MfgpModel {
public:
    MfgpModel(SubsetCollection subsets, MfgpParams params);

    static MfgpModel fit(const SubsetCollection& subsets, const FitConfig& config, Rng& rng,
                         std::span<const MfgpParams> extra_starts = {});

    [[nodiscard]] MfgpPosterior predict(const Eigen::Ref<const Vector>& x) const;
    /// Prediction of a single output; cheaper than predict() when only one is needed.
    [[nodiscard]] Posterior predict_output(int output, const Eigen::Ref<const Vector>& x) const;

    [[nodiscard]] const MfgpParams& params() const { return params_; }
    [[nodiscard]] const SubsetCollection& subsets() const { return subsets_; }
    [[nodiscard]] int outputs() const { return params_.outputs(); }

private:
    SubsetCollection subsets_;
    MfgpParams params_;
    Matrix stacked_inputs_;
    std::vector<int> output_of_row_;
    Matrix output_covariance_;
    CholeskyModel cholesky_;
};

}  // namespace clbo
