#pragma once

#include "hybridsim/estimators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hybridsim {

/// Source of the per-fold bias estimate b_hat used by the selector.
enum class BiasSource { PsiPound, Nco };

std::string_view to_string(BiasSource b);

struct SelectorConfig {
    int V = 10;
    BiasSource bias_source = BiasSource::Nco;
    bool use_nco = true;
    int mc_draws = 1000;
    Bounds bounds = kDefaultPropensityBounds;
    double level = 0.95;
    int inner_V = 5;
    /// Skip selection and use this experiment in every fold.
    std::optional<Experiment> forced_choice;

    void validate() const;
    EstimatorConfig estimator() const { return {inner_V, bounds}; }
};

struct FoldDecision {
    int fold = 0;
    Experiment choice = Experiment::RctOnly;
    double b_hat = 0.0;
    double var_rct = 0.0;
    double var_pooled = 0.0;
    std::optional<double> psi_pound;
    std::optional<double> nco_ate;
    /// Pooled nuisance fitting or targeting failed; RctOnly was forced.
    std::string diagnostic;
};

/// Pooled iff b_hat^2 + var_pooled < var_rct; ties keep the RCT alone.
Experiment choose_experiment(double b_hat, double var_rct, double var_pooled);

struct EsCvtmleResult {
    EstimateWithCI estimate;
    std::vector<FoldDecision> decisions;
    std::vector<FoldEstimate> fold_estimates;
    double rwd_inclusion_fraction = 0.0;
    double psi_pound_avg = 0.0;
    std::optional<double> nco_ate_avg;
};

/// Decision for one fold from its pooled training split (RCT records plus
/// real-world controls). Both criteria are evaluated on the training data.
FoldDecision select_experiment(const StudyDataset& train, const SelectorConfig& config,
                               const RandomStream& stream, int fold = 0);

/// Bias-widened interval around psi_hat = mean(psi_v) from Monte Carlo draws of
/// Delta = eps + u * b_bar, eps ~ Normal(0, v_hat), u = +/-1 equally likely, with
/// v_hat = sum(var_v) / V^2 and b_bar = mean over folds of 1{Pooled} * b_hat.
/// Draws are stratified uniforms mapped through the inverse mixture CDF, so the
/// interval widens monotonically in |b_bar| for a fixed stream.
Interval mc_ci(const std::vector<FoldEstimate>& fold_estimates, const std::vector<FoldDecision>& decisions,
               const SelectorConfig& config, const RandomStream& stream);

/// Same construction with v_hat and b_bar given directly.
Interval mc_ci(double psi_hat, double v_hat, double b_bar, int draws, double level, const RandomStream& stream);

/// Experiment-selector CV-TMLE. An empty `rwd` reduces to cv_tmle on the RCT.
EsCvtmleResult estimate_hybrid(const StudyDataset& rct, const StudyDataset& rwd, const SelectorConfig& config,
                               const RandomStream& stream);

}  // namespace hybridsim
