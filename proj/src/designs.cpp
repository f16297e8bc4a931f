#include "hybridsim/designs.hpp"

namespace hybridsim {

bool is_significant(const EstimateWithCI& est, const SignificanceRule& rule)
{
    return est.upper < rule.threshold;
}

std::string_view to_string(Design d)
{
    switch (d) {
    case Design::D1: return "D1";
    case Design::D2: return "D2";
    case Design::D3: return "D3";
    case Design::Naive: return "Naive";
    }
    return "?";
}

IterationStreams IterationStreams::derive(const RandomStream& base)
{
    return {base.child("rct1"), base.child("rct2"), base.child("rwd"), base.child("estimator")};
}

namespace {

DesignOutcome superiority_stage(Design design, const IterationStreams& streams, const SignificanceRule& rule,
                                const DgpConfig& dgp, double person_years)
{
    const auto rct2 = generate_rct(dgp.n_rct2, streams.rct2, dgp, DatasetLabel::Rct2);
    DesignOutcome out;
    out.design = design;
    out.final = unadjusted_rd(rct2, rule.level);
    out.rejected = is_significant(out.final, rule);
    out.stage = Stage::Second;
    out.person_years = person_years;
    return out;
}

}  // namespace

DesignOutcome run_design1(const IterationStreams& streams, const SignificanceRule& rule, const DgpConfig& dgp)
{
    const auto rct1 = generate_rct(dgp.n_rct1, streams.rct1, dgp, DatasetLabel::Rct1);
    const auto stage1 = unadjusted_rd(rct1, rule.level);
    if (is_significant(stage1, rule))
        return {Design::D1, stage1, true, Stage::First, person_years::kStageOneOnly, std::nullopt};
    return superiority_stage(Design::D1, streams, rule, dgp, person_years::kBothStages);
}

DesignOutcome run_design2(const IterationStreams& streams, const SignificanceRule& rule, const DgpConfig& dgp)
{
    return superiority_stage(Design::D2, streams, rule, dgp, person_years::kSuperiorityOnly);
}

DesignOutcome run_design3(const IterationStreams& streams, const SignificanceRule& rule, const DgpConfig& dgp,
                          const SelectorConfig& selector, StageOneAnalysis analysis)
{
    const auto rct1 = generate_rct(dgp.n_rct1, streams.rct1, dgp, DatasetLabel::Rct1);
    EstimateWithCI stage1;
    std::optional<double> inclusion;
    if (analysis == StageOneAnalysis::Unadjusted) {
        stage1 = unadjusted_rd(rct1, rule.level);
        inclusion = 0.0;
    } else {
        const auto rwd = generate_rwd(dgp.n_rwd, dgp.bias_b, dgp.nco_affected, streams.rwd, dgp);
        const auto hybrid = estimate_hybrid(rct1, rwd, selector, streams.estimator);
        stage1 = hybrid.estimate;
        inclusion = hybrid.rwd_inclusion_fraction;
    }
    DesignOutcome out;
    if (is_significant(stage1, rule)) {
        out = {Design::D3, stage1, true, Stage::First, person_years::kStageOneOnly, std::nullopt};
    } else {
        out = superiority_stage(Design::D3, streams, rule, dgp, person_years::kBothStages);
    }
    out.rwd_inclusion_fraction = inclusion;
    return out;
}

DesignOutcome run_naive(const IterationStreams& streams, const SignificanceRule& rule, const DgpConfig& dgp,
                        const SelectorConfig& selector)
{
    const auto rct1 = generate_rct(dgp.n_rct1, streams.rct1, dgp, DatasetLabel::Rct1);
    const auto rwd = generate_rwd(dgp.n_rwd, dgp.bias_b, dgp.nco_affected, streams.rwd, dgp);
    DesignOutcome out;
    out.design = Design::Naive;
    out.final = naive_pooled_rd(rct1, rwd, selector.V, streams.estimator, selector.estimator());
    out.rejected = is_significant(out.final, rule);
    out.stage = Stage::First;
    out.rwd_inclusion_fraction = 1.0;
    return out;
}

double tipping_point(const EstimateWithCI& est, double null_value)
{
    return est.upper < null_value ? null_value - est.upper : 0.0;
}

}  // namespace hybridsim
