#include "clbo/mfgp.hpp"

#include "clbo/box_minimize.hpp"
#include "clbo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace clbo {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
// Bound on the free entries of the unit lower-triangular correlation factor.
// For m = 2 this caps |rho| at 30/sqrt(901) ~ 0.9994.
constexpr double kFactorBound = 30.0;

int factor_entries(int outputs) { return outputs * (outputs - 1) / 2; }

void check_params(const SubsetCollection& subsets, const MfgpParams& params) {
    require(subsets.count() >= 1, "MFGP: at least one subset is required");
    if (params.outputs() != subsets.count() || params.noise_variances.size() != params.output_scales.size() ||
        params.correlation_factor.rows() != params.outputs() || params.correlation_factor.cols() != params.outputs()) {
        throw ContractViolation("MFGP: parameter shapes do not match the subset count");
    }
    if (params.dimension() != subsets.dimension()) {
        throw ContractViolation("MFGP: lengthscale count does not match input dimension");
    }
    require((params.shared_lengthscales.array() > 0.0).all(), "MFGP: lengthscales must be positive");
    require((params.output_scales.array() > 0.0).all(), "MFGP: output scales must be positive");
    require((params.noise_variances.array() >= 0.0).all(), "MFGP: noise variances must be non-negative");
    for (int i = 0; i < subsets.count(); ++i) {
        require(subsets.subsets[static_cast<std::size_t>(i)].size() >= 1, "MFGP: every subset needs a row");
    }
}

std::vector<int> row_outputs(const SubsetCollection& subsets) {
    std::vector<int> owner;
    owner.reserve(static_cast<std::size_t>(subsets.total_rows()));
    for (int i = 0; i < subsets.count(); ++i) {
        owner.insert(owner.end(), static_cast<std::size_t>(subsets.subsets[static_cast<std::size_t>(i)].size()), i);
    }
    return owner;
}

// Unit-amplitude SE correlation over the stacked inputs.
Matrix stacked_correlation(const Matrix& stacked, const Vector& lengthscales) {
    const Eigen::Index n = stacked.rows();
    Matrix corr(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        corr(r, r) = 1.0;
        for (Eigen::Index s = 0; s < r; ++s) {
            const double value = se_correlation(stacked.row(r).transpose(), stacked.row(s).transpose(), lengthscales);
            corr(r, s) = value;
            corr(s, r) = value;
        }
    }
    return corr;
}

Matrix assemble(const Matrix& corr, const std::vector<int>& owner, const MfgpParams& params) {
    const Matrix cov = params.output_covariance();
    const Eigen::Index n = corr.rows();
    Matrix k(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const int o = owner[static_cast<std::size_t>(r)];
        for (Eigen::Index s = 0; s < n; ++s) {
            k(r, s) = cov(o, owner[static_cast<std::size_t>(s)]) * corr(r, s);
        }
        k(r, r) += params.noise_variances[o];
    }
    return k;
}

CholeskyModel factor_mfgp(const Matrix& k, const Vector& y, const MfgpParams& params) {
    auto model = CholeskyModel::try_factor(k, y);
    if (!model) {
        const Vector packed = pack_mfgp(params);
        throw IllConditionedModel("MFGP covariance is not positive definite after maximum jitter",
                                  std::vector<double>(packed.data(), packed.data() + packed.size()));
    }
    return std::move(*model);
}

double log_uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return u(rng);
}

}  // namespace

int SubsetCollection::total_rows() const {
    int total = 0;
    for (const auto& s : subsets) {
        total += s.size();
    }
    return total;
}

Matrix SubsetCollection::stacked_inputs() const {
    Matrix out(total_rows(), dimension());
    Eigen::Index row = 0;
    for (const auto& s : subsets) {
        out.middleRows(row, s.size()) = s.inputs;
        row += s.size();
    }
    return out;
}

Vector SubsetCollection::stacked_outputs() const {
    Vector out(total_rows());
    Eigen::Index row = 0;
    for (const auto& s : subsets) {
        out.segment(row, s.size()) = s.outputs;
        row += s.size();
    }
    return out;
}

int SubsetCollection::offset(int i) const {
    int total = 0;
    for (int k = 0; k < i; ++k) {
        total += subsets[static_cast<std::size_t>(k)].size();
    }
    return total;
}

std::vector<int> bootstrap_indices(const Matrix& rows, Rng& rng) {
    const int n = static_cast<int>(rows.rows());
    require(n >= 1, "bootstrap: master set is empty");
    // Canonical representative of every row so that equal rows collapse.
    const std::vector<int> distinct = unique_row_indices(rows);
    std::vector<int> canonical(static_cast<std::size_t>(n), -1);
    for (int idx : distinct) {
        canonical[static_cast<std::size_t>(idx)] = idx;
    }
    for (int i = 0; i < n; ++i) {
        if (canonical[static_cast<std::size_t>(i)] >= 0) {
            continue;
        }
        for (int idx : distinct) {
            if (rows.row(idx) == rows.row(i)) {
                canonical[static_cast<std::size_t>(i)] = idx;
                break;
            }
        }
    }

    std::uniform_int_distribution<int> pick(0, n - 1);
    std::set<int> drawn;
    for (int k = 0; k < n; ++k) {
        drawn.insert(canonical[static_cast<std::size_t>(pick(rng))]);
    }
    // Top up tiny subsets so each output has at least two points to fit.
    if (drawn.size() < 2 && distinct.size() >= 2) {
        std::vector<int> missing;
        for (int idx : distinct) {
            if (!drawn.contains(idx)) {
                missing.push_back(idx);
            }
        }
        std::shuffle(missing.begin(), missing.end(), rng);
        for (std::size_t k = 0; drawn.size() < 2 && k < missing.size(); ++k) {
            drawn.insert(missing[k]);
        }
    }
    return {drawn.begin(), drawn.end()};
}

SubsetCollection bootstrap_subsets(const Dataset& master, int m, Rng& rng) {
    require(m >= 1, "bootstrap_subsets: m must be at least 1");
    master.validate();
    SubsetCollection out;
    out.subsets.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const auto idx = bootstrap_indices(master.inputs, rng);
        out.subsets.push_back(
            Dataset{select_rows(master.inputs, idx), select_entries(master.outputs, idx), master.transform});
    }
    return out;
}

Matrix MfgpParams::correlation() const {
    const Matrix a = correlation_factor * correlation_factor.transpose();
    const Vector inv_root = a.diagonal().array().rsqrt().matrix();
    Matrix r = inv_root.asDiagonal() * a * inv_root.asDiagonal();
    r.diagonal().setOnes();
    return r.selfadjointView<Eigen::Lower>();
}

Matrix MfgpParams::output_covariance() const {
    const Vector s = output_scales.array().sqrt().matrix();
    const Matrix b = s.asDiagonal() * correlation() * s.asDiagonal();
    return b.selfadjointView<Eigen::Lower>();
}

MfgpParams MfgpParams::from_sogp(const SogpParams& params, int outputs) {
    require(outputs >= 1, "MfgpParams::from_sogp: need at least one output");
    return MfgpParams{params.lengthscales, Vector::Constant(outputs, params.signal_variance),
                      Vector::Constant(outputs, params.noise_variance), Matrix::Identity(outputs, outputs)};
}

Matrix MfgpParams::factor_for(const Matrix& correlation) {
    Eigen::LLT<Matrix> llt(correlation);
    require(llt.info() == Eigen::Success, "MfgpParams::factor_for: correlation matrix is not positive definite");
    Matrix lower = llt.matrixL();
    const Vector diag = lower.diagonal();
    return diag.cwiseInverse().asDiagonal() * lower;
}

Vector pack_mfgp(const MfgpParams& params) {
    const int d = params.dimension();
    const int m = params.outputs();
    Vector packed(d + 2 * m + factor_entries(m));
    packed.head(d) = params.shared_lengthscales.array().log().matrix();
    packed.segment(d, m) = params.output_scales.array().log().matrix();
    packed.segment(d + m, m) = params.noise_variances.array().log().matrix();
    int k = d + 2 * m;
    for (int i = 1; i < m; ++i) {
        for (int j = 0; j < i; ++j) {
            packed[k++] = params.correlation_factor(i, j);
        }
    }
    return packed;
}

MfgpParams unpack_mfgp(const Vector& packed, int dimension, int outputs) {
    const int d = dimension;
    const int m = outputs;
    require(packed.size() == d + 2 * m + factor_entries(m), "unpack_mfgp: packed vector has wrong length");
    MfgpParams params{packed.head(d).array().exp().matrix(), packed.segment(d, m).array().exp().matrix(),
                      packed.segment(d + m, m).array().exp().matrix(), Matrix::Identity(m, m)};
    int k = d + 2 * m;
    for (int i = 1; i < m; ++i) {
        for (int j = 0; j < i; ++j) {
            params.correlation_factor(i, j) = packed[k++];
        }
    }
    return params;
}

Matrix build_block_covariance(const SubsetCollection& subsets, const MfgpParams& params) {
    check_params(subsets, params);
    return assemble(stacked_correlation(subsets.stacked_inputs(), params.shared_lengthscales), row_outputs(subsets),
                    params);
}

double mfgp_nlml(const SubsetCollection& subsets, const MfgpParams& params) {
    const Matrix k = build_block_covariance(subsets, params);
    const CholeskyModel chol = factor_mfgp(k, subsets.stacked_outputs(), params);
    return 0.5 * chol.data_fit() + 0.5 * chol.log_determinant() + 0.5 * chol.size() * kLogTwoPi;
}

NlmlValue mfgp_nlml_with_gradient(const SubsetCollection& subsets, const MfgpParams& params) {
    check_params(subsets, params);
    const int d = params.dimension();
    const int m = params.outputs();
    const Matrix x = subsets.stacked_inputs();
    const std::vector<int> owner = row_outputs(subsets);
    const Matrix corr = stacked_correlation(x, params.shared_lengthscales);
    const Matrix cov = params.output_covariance();
    const CholeskyModel chol = factor_mfgp(assemble(corr, owner, params), subsets.stacked_outputs(), params);
    const int n = chol.size();

    NlmlValue result;
    result.value = 0.5 * chol.data_fit() + 0.5 * chol.log_determinant() + 0.5 * n * kLogTwoPi;
    result.gradient = Vector::Zero(d + 2 * m + factor_entries(m));

    Matrix w = chol.inverse();
    w.noalias() -= chol.alpha() * chol.alpha().transpose();

    // Gradient w.r.t. the full (symmetric) output covariance B and the lengthscales.
    Matrix grad_cov = Matrix::Zero(m, m);
    const Vector inv_sq = params.shared_lengthscales.array().square().inverse().matrix();
    for (int r = 0; r < n; ++r) {
        const int o_r = owner[static_cast<std::size_t>(r)];
        grad_cov(o_r, o_r) += 0.5 * w(r, r);
        result.gradient[d + m + o_r] += 0.5 * w(r, r) * params.noise_variances[o_r];
        for (int s = 0; s < r; ++s) {
            const int o_s = owner[static_cast<std::size_t>(s)];
            const double wc = w(r, s) * corr(r, s);
            grad_cov(o_r, o_s) += 0.5 * wc;
            grad_cov(o_s, o_r) += 0.5 * wc;
            const double wk = wc * cov(o_r, o_s);
            for (int h = 0; h < d; ++h) {
                const double diff = x(r, h) - x(s, h);
                result.gradient[h] += wk * diff * diff * inv_sq[h];
            }
        }
    }

    // B = S R S with S = diag(sqrt(sf2)).
    const Vector s = params.output_scales.array().sqrt().matrix();
    for (int k = 0; k < m; ++k) {
        result.gradient[d + k] = grad_cov.row(k).dot(cov.row(k));
    }
    if (m > 1) {
        const Matrix r_mat = params.correlation();
        const Matrix grad_r = s.asDiagonal() * grad_cov * s.asDiagonal();
        // R = N A N with A = L L^T and N = diag(A)^{-1/2}.
        const Matrix& l = params.correlation_factor;
        const Matrix a = l * l.transpose();
        const Vector inv_root = a.diagonal().array().rsqrt().matrix();
        Matrix grad_a = inv_root.asDiagonal() * grad_r * inv_root.asDiagonal();
        for (int k = 0; k < m; ++k) {
            grad_a(k, k) -= grad_r.row(k).dot(r_mat.row(k)) / a(k, k);
        }
        const Matrix grad_l = 2.0 * grad_a * l;
        int k = d + 2 * m;
        for (int i = 1; i < m; ++i) {
            for (int j = 0; j < i; ++j) {
                result.gradient[k++] = grad_l(i, j);
            }
        }
    }
    return result;
}

MfgpParams fit_mfgp(const SubsetCollection& subsets, const FitConfig& config, Rng& rng,
                    std::span<const MfgpParams> extra_starts) {
    require(subsets.count() >= 1, "fit_mfgp: at least one subset is required");
    for (const auto& s : subsets.subsets) {
        require(s.size() >= 1, "fit_mfgp: every subset needs at least one row");
    }
    require(subsets.total_rows() >= 2, "fit_mfgp: need at least two stacked rows");
    const int d = subsets.dimension();
    const int m = subsets.count();
    const int size = d + 2 * m + factor_entries(m);
    const auto& b = config.bounds;

    Vector lower(size);
    Vector upper(size);
    lower.head(d).setConstant(std::log(b.lengthscale.lower));
    upper.head(d).setConstant(std::log(b.lengthscale.upper));
    lower.segment(d, m).setConstant(std::log(b.signal_variance.lower));
    upper.segment(d, m).setConstant(std::log(b.signal_variance.upper));
    const double noise_low = std::log(std::max(b.noise_variance.lower, kNoiseFloor));
    lower.segment(d + m, m).setConstant(noise_low);
    upper.segment(d + m, m).setConstant(config.learn_noise ? std::log(b.noise_variance.upper) : noise_low);
    lower.tail(factor_entries(m)).setConstant(-kFactorBound);
    upper.tail(factor_entries(m)).setConstant(kFactorBound);

    std::vector<Vector> starts;
    if (config.include_default_start) {
        Matrix corr = Matrix::Constant(m, m, 0.3);
        corr.diagonal().setOnes();
        MfgpParams initial{Vector::Constant(d, 0.5), Vector::Ones(m), Vector::Constant(m, 1e-4),
                           MfgpParams::factor_for(corr)};
        starts.push_back(pack_mfgp(initial));
    }
    for (const auto& start : extra_starts) {
        require(start.dimension() == d && start.outputs() == m, "fit_mfgp: start point has wrong shape");
        starts.push_back(pack_mfgp(start));
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 0; s < config.starts; ++s) {
        Vector packed(size);
        for (int h = 0; h < d; ++h) {
            packed[h] = log_uniform(rng, std::max(b.lengthscale.lower, 0.05), std::min(b.lengthscale.upper, 2.0));
        }
        for (int i = 0; i < m; ++i) {
            packed[d + i] =
                log_uniform(rng, std::max(b.signal_variance.lower, 0.2), std::min(b.signal_variance.upper, 5.0));
        }
        for (int i = 0; i < m; ++i) {
            packed[d + m + i] = log_uniform(rng, std::max(b.noise_variance.lower, kNoiseFloor), 1e-2);
        }
        for (int k = 0; k < factor_entries(m); ++k) {
            packed[d + 2 * m + k] = normal(rng);
        }
        starts.push_back(packed);
    }

    const SmoothObjective objective = [&subsets, d, m](const Vector& packed, Vector* gradient) {
        try {
            const MfgpParams params = unpack_mfgp(packed, d, m);
            if (gradient == nullptr) {
                return mfgp_nlml(subsets, params);
            }
            NlmlValue value = mfgp_nlml_with_gradient(subsets, params);
            *gradient = std::move(value.gradient);
            return value.value;
        } catch (const IllConditionedModel&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    QuasiNewtonOptions options;
    options.max_iterations = config.max_iterations;
    options.gradient_tolerance = config.gradient_tolerance;

    Vector best;
    double best_value = std::numeric_limits<double>::infinity();
    Vector last_tried;
    for (const Vector& start : starts) {
        last_tried = start.cwiseMax(lower).cwiseMin(upper);
        const LocalResult local = minimize_quasi_newton(objective, last_tried, lower, upper, options);
        if (local.value < best_value) {
            best_value = local.value;
            best = local.x;
        }
    }
    if (!std::isfinite(best_value)) {
        throw IllConditionedModel("fit_mfgp: every start failed to factorize",
                                  std::vector<double>(last_tried.data(), last_tried.data() + last_tried.size()));
    }
    return unpack_mfgp(best, d, m);
}

MfgpModel::MfgpModel(SubsetCollection subsets, MfgpParams params)
    : subsets_(std::move(subsets)),
      params_(std::move(params)),
      stacked_inputs_(subsets_.stacked_inputs()),
      output_of_row_(row_outputs(subsets_)),
      output_covariance_(params_.output_covariance()),
      cholesky_(factor_mfgp(build_block_covariance(subsets_, params_), subsets_.stacked_outputs(), params_)) {}

MfgpModel MfgpModel::fit(const SubsetCollection& subsets, const FitConfig& config, Rng& rng,
                         std::span<const MfgpParams> extra_starts) {
    return MfgpModel(subsets, fit_mfgp(subsets, config, rng, extra_starts));
}

Posterior MfgpModel::predict_output(int output, const Eigen::Ref<const Vector>& x) const {
    require(output >= 0 && output < outputs(), "MfgpModel::predict_output: output index out of range");
    require(x.size() == stacked_inputs_.cols(), "MfgpModel::predict_output: dimension mismatch");
    Vector k = correlation_vector(x, stacked_inputs_, params_.shared_lengthscales);
    for (Eigen::Index r = 0; r < k.size(); ++r) {
        k[r] *= output_covariance_(output, output_of_row_[static_cast<std::size_t>(r)]);
    }
    const double mean = k.dot(cholesky_.alpha());
    const Vector v = cholesky_.half_solve(k);
    const double prior = output_covariance_(output, output);
    return Posterior{mean, std::max(prior - v.squaredNorm(), 0.0) + params_.noise_variances[output]};
}

MfgpPosterior MfgpModel::predict(const Eigen::Ref<const Vector>& x) const {
    require(x.size() == stacked_inputs_.cols(), "MfgpModel::predict: dimension mismatch");
    const Vector corr = correlation_vector(x, stacked_inputs_, params_.shared_lengthscales);
    const int m = outputs();
    MfgpPosterior out{Vector(m), Vector(m)};
    for (int j = 0; j < m; ++j) {
        Vector k = corr;
        for (Eigen::Index r = 0; r < k.size(); ++r) {
            k[r] *= output_covariance_(j, output_of_row_[static_cast<std::size_t>(r)]);
        }
        out.means[j] = k.dot(cholesky_.alpha());
        const Vector v = cholesky_.half_solve(k);
        out.variances[j] = std::max(output_covariance_(j, j) - v.squaredNorm(), 0.0) + params_.noise_variances[j];
    }
    return out;
}

}  // namespace clbo
