#pragma once

#include "hybridsim/super_learner.hpp"
#include "hybridsim/trial_data.hpp"

#include <optional>
#include <vector>

namespace hybridsim {

/// Which experiment an analysis uses: the RCT alone, or the RCT pooled with
/// real-world controls.
enum class Experiment { RctOnly, Pooled };

std::string_view to_string(Experiment e);

struct EstimatorConfig {
    int inner_V = 5;
    Bounds bounds = kDefaultPropensityBounds;
};

/// Nuisance regressions fitted on a training split.
struct NuisanceFits {
    Predictor qbar = Predictor::constant(0.5, kOutcomeBounds);  // E[Y | C = 0, A, W]
    Predictor g = Predictor::constant(0.5, kDefaultPropensityBounds);    // P(A = 1 | W)
    Predictor pi = Predictor::constant(1.0, kDefaultPropensityBounds);   // P(C = 0 | A, W)
    OutcomeKind outcome = OutcomeKind::Primary;
    Experiment experiment = Experiment::RctOnly;
    bool fell_back = false;
};

/// Extra regressions for the control-arm comparison (psi#), fitted on a
/// pooled training split.
struct PsiPoundFits {
    Predictor q_rct_control = Predictor::constant(0.5, kOutcomeBounds);     // E[Y | C=0, A=0, S=0, W]
    Predictor q_pooled_control = Predictor::constant(0.5, kOutcomeBounds);  // E[Y | C=0, A=0, W]
    Predictor p_rct_control = Predictor::constant(0.5, kDefaultPropensityBounds);  // P(A=0, S=0 | W)
    Predictor g = Predictor::constant(0.5, kDefaultPropensityBounds);       // P(A = 1 | W), pooled
    Predictor pi_rct = Predictor::constant(1.0, kDefaultPropensityBounds);  // P(C = 0), RCT
    Predictor pi_pooled = Predictor::constant(1.0, kDefaultPropensityBounds);  // P(C = 0 | A, W), pooled
};

struct FoldEstimate {
    double psi_v = 0.0;
    /// Influence-curve variance divided by the evaluation sample size.
    double var_v = 0.0;
    std::size_t n_v = 0;
    double ic_mean = 0.0;
    std::vector<double> epsilon;
    /// Some g * pi fell below the lower truncation bound.
    bool positivity_warning = false;
};

/// Unadjusted risk difference among uncensored subjects with a Wald CI.
/// Throws EmptyArm.
EstimateWithCI unadjusted_rd(const StudyDataset& dataset, double level = 0.95);

/// Fits qbar, g and pi on `train`. The RCT-only experiment uses the sample
/// proportion for censoring; the pooled one uses the super learner. A
/// supplied `treatment` model is reused instead of refitting g.
NuisanceFits fit_nuisances(const StudyDataset& train, Experiment experiment, OutcomeKind outcome,
                           const EstimatorConfig& config, const RandomStream& stream,
                           const std::optional<Predictor>& treatment = std::nullopt);

/// Targeted risk difference on `validate` with nuisances from `fits`:
/// logit Q* = logit Q + eps * H, H = (2A - 1) / (g(A | W) pi(A, W)), fluctuated
/// over uncensored records, then averaged over all records.
/// Throws NoTreatedInValidation.
FoldEstimate tmle_rd(const StudyDataset& validate, const NuisanceFits& fits);

/// Targeted effect of treatment on the negative control outcome; `fits`
/// must be fitted with OutcomeKind::NegativeControl.
FoldEstimate nco_ate(const StudyDataset& validate, const NuisanceFits& fits);

PsiPoundFits fit_psi_pound_nuisances(const StudyDataset& train, const NuisanceFits& pooled_fits,
                                     const EstimatorConfig& config, const RandomStream& stream);

/// Control-arm causal gap: mean over `validate` of Q*_rct(W) - Q*_pooled(W),
/// each targeted separately. Throws NoRctControlsInValidation.
FoldEstimate psi_pound(const StudyDataset& validate, const PsiPoundFits& fits);

struct CvTmleResult {
    EstimateWithCI estimate;
    std::vector<FoldEstimate> folds;
};

/// Stream used for the nuisance fits of fold `v`; shared by cv_tmle and the
/// experiment selector so their RCT-only paths coincide.
RandomStream nuisance_stream(const RandomStream& stream, int v, Experiment experiment);
RandomStream fold_stream(const RandomStream& stream);

/// Cross-validated TMLE of the risk difference: nuisances on V - 1 folds,
/// targeting on the held-out fold, estimates averaged, variance
/// (1 / V^2) * sum var_v, Wald interval.
CvTmleResult cv_tmle(const StudyDataset& dataset, Experiment experiment, int V,
                     const EstimatorConfig& config, const RandomStream& stream, double level = 0.95);

/// CV-TMLE on the pooled data with no experiment selection or bias penalty.
EstimateWithCI naive_pooled_rd(const StudyDataset& rct, const StudyDataset& rwd, int V,
                               const RandomStream& stream, const EstimatorConfig& config = {});

}  // namespace hybridsim
