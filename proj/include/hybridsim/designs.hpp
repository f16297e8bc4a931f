#pragma once

#include "hybridsim/dgp.hpp"
#include "hybridsim/es_cvtmle.hpp"

#include <optional>

namespace hybridsim {

/// Reject the shifted null when the upper confidence limit is strictly below
/// `threshold` (risk-difference scale).
struct SignificanceRule {
    double threshold = 0.011;
    double level = 0.95;
};

bool is_significant(const EstimateWithCI& est, const SignificanceRule& rule);

enum class Design { D1, D2, D3, Naive };
enum class Stage { First, Second };

std::string_view to_string(Design d);

/// Placebo-arm person-years precluded from a GLP1-RA.
namespace person_years {
inline constexpr double kStageOneOnly = 1591.5;
inline constexpr double kSuperiorityOnly = 4750.0;
inline constexpr double kBothStages = 6341.5;
}  // namespace person_years

struct DesignOutcome {
    Design design = Design::D1;
    EstimateWithCI final;
    bool rejected = false;
    Stage stage = Stage::First;
    /// Absent for the naive pooled analysis, which is not a trial design.
    std::optional<double> person_years;
    std::optional<double> rwd_inclusion_fraction;
};

/// Streams a single iteration draws from. RCT1 and RCT2 are shared between
/// designs so Design 1 and Design 3 see the same trials.
struct IterationStreams {
    RandomStream rct1;
    RandomStream rct2;
    RandomStream rwd;
    RandomStream estimator;

    static IterationStreams derive(const RandomStream& base);
};

enum class StageOneAnalysis { EsCvtmle, Unadjusted };

DesignOutcome run_design1(const IterationStreams& streams, const SignificanceRule& rule, const DgpConfig& dgp = {});
DesignOutcome run_design2(const IterationStreams& streams, const SignificanceRule& rule, const DgpConfig& dgp = {});

/// Hybrid RCT1 + real-world control analysis; the superiority trial runs only
/// when stage 1 does not reject. `dgp.bias_b` and `dgp.nco_affected` define
/// the real-world data.
DesignOutcome run_design3(const IterationStreams& streams, const SignificanceRule& rule, const DgpConfig& dgp,
                          const SelectorConfig& selector,
                          StageOneAnalysis analysis = StageOneAnalysis::EsCvtmle);

/// Always-pool CV-TMLE on RCT1 + real-world controls; single stage.
DesignOutcome run_naive(const IterationStreams& streams, const SignificanceRule& rule, const DgpConfig& dgp,
                        const SelectorConfig& selector);

/// Smallest additive shift that moves the upper confidence limit up to
/// `null_value`; 0 when the interval already reaches it.
double tipping_point(const EstimateWithCI& est, double null_value);

}  // namespace hybridsim
