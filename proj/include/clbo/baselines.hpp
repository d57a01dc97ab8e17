#pragma once

#include "clbo/engine.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clbo {

enum class OptimizerKind { Ego, ConstantLiar, PeiBatch, Msbo, Clbo };

/// An optimizer selection as named on the command line, e.g. "ego", "cl",
/// "pei", "msbo", "clbo", "clbo-mfgp3", "clbo-mfgp2+sogp".
struct OptimizerSpec {
    OptimizerKind kind = OptimizerKind::Clbo;
    /// Points per cycle for the constant-liar and pseudo-EI batch baselines.
    int batch_size = 3;
    /// Subset count and full-data model flag for CLBO / MSBO.
    int m_subsets = 2;
    bool use_sogp = true;

    [[nodiscard]] std::string label() const;
    /// Throws ConfigError (field "optimizer") for unknown names.
    static OptimizerSpec parse(std::string_view name);
};

enum class BatchRule { ConstantLiar, PseudoEi };

/// EI at x times the influence function of every point in `chosen`.
double batch_pseudo_ei(const SogpModel& model, double f_min, const Vector& x, std::span<const Vector> chosen);

/// Picks `batch_size` points of [0,1]^d from one model (standardized f_min).
/// Constant liar refits the posterior (hyperparameters fixed) with y = f_min
/// at every earlier pick; pseudo-EI multiplies EI by their influence functions.
std::vector<Candidate> select_batch(const SogpModel& model, double f_min, int batch_size, BatchRule rule,
                                    const AcquisitionConfig& config, Rng& rng, std::span<const Vector> seeds = {});

/// Sequential expected-improvement loop on a full-data SOGP.
OptimizationResult run_ego(const BenchmarkProblem& problem, const LoopConfig& config);

/// Batch selection by repeated EI maximization against a model conditioned
/// on lies y = f_min at the points already chosen this cycle.
OptimizationResult run_constant_liar(const BenchmarkProblem& problem, const LoopConfig& config, int batch_size);

/// Batch selection by EI times the product of influence functions of the points already chosen this cycle.
OptimizationResult run_pei_batch(const BenchmarkProblem& problem, const LoopConfig& config, int batch_size);

/// The co-learning loop with an independently fitted SOGP per subset.
OptimizationResult run_msbo(const BenchmarkProblem& problem, const ClboConfig& config);

/// Dispatches on `spec`; `config` supplies the shared loop settings.
OptimizationResult run_optimizer(const BenchmarkProblem& problem, const OptimizerSpec& spec, const ClboConfig& config);

}  // namespace clbo
