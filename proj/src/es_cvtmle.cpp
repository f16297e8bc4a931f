#include "hybridsim/es_cvtmle.hpp"

#include "hybridsim/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace hybridsim {

std::string_view to_string(BiasSource b) { return b == BiasSource::PsiPound ? "PsiPound" : "Nco"; }

void SelectorConfig::validate() const
{
    if (V < 2)
        throw ConfigError("selector fold count V must be at least 2");
    if (mc_draws < 500)
        throw ConfigError("selector needs at least 500 Monte Carlo draws");
    if (inner_V < 2)
        throw ConfigError("inner fold count must be at least 2");
    if (!(level > 0.0 && level < 1.0))
        throw ConfigError("confidence level must lie in (0, 1)");
    if (!(bounds.lower > 0.0 && bounds.lower < bounds.upper && bounds.upper <= 1.0))
        throw ConfigError("truncation bounds must satisfy 0 < lower < upper <= 1");
    if (bias_source == BiasSource::Nco && !use_nco)
        throw ConfigError("bias source Nco requires use_nco");
}

Experiment choose_experiment(double b_hat, double var_rct, double var_pooled)
{
    return b_hat * b_hat + var_pooled < var_rct ? Experiment::Pooled : Experiment::RctOnly;
}

namespace {

struct FoldSelection {
    FoldDecision decision;
    NuisanceFits rct_fits;
    std::optional<NuisanceFits> pooled_fits;
};

FoldSelection select_internal(const StudyDataset& train, const SelectorConfig& config,
                              const RandomStream& stream, int fold, bool have_rwd)
{
    const EstimatorConfig est = config.estimator();
    const auto train_rct = train.subset([&](std::size_t i) { return train[i].is_rct(); });

    FoldSelection sel;
    sel.decision.fold = fold;
    sel.rct_fits = fit_nuisances(train_rct, Experiment::RctOnly, OutcomeKind::Primary, est,
                                 nuisance_stream(stream, fold, Experiment::RctOnly));
    sel.decision.var_rct = tmle_rd(train_rct, sel.rct_fits).var_v;
    sel.decision.choice = Experiment::RctOnly;

    if (!have_rwd || config.forced_choice == Experiment::RctOnly)
        return sel;

    try {
        const RandomStream pooled_stream = nuisance_stream(stream, fold, Experiment::Pooled);
        NuisanceFits pooled = fit_nuisances(train, Experiment::Pooled, OutcomeKind::Primary, est, pooled_stream);
        sel.decision.var_pooled = tmle_rd(train, pooled).var_v;

        const auto psi_fits = fit_psi_pound_nuisances(train, pooled, est, pooled_stream.child("psi_pound"));
        sel.decision.psi_pound = psi_pound(train, psi_fits).psi_v;

        if (config.use_nco) {
            const auto nco_fits = fit_nuisances(train, Experiment::Pooled, OutcomeKind::NegativeControl, est,
                                                pooled_stream.child("nco"), pooled.g);
            sel.decision.nco_ate = nco_ate(train, nco_fits).psi_v;
        }
        sel.decision.b_hat = config.bias_source == BiasSource::Nco ? *sel.decision.nco_ate
                                                                   : *sel.decision.psi_pound;
        sel.decision.choice = config.forced_choice
            ? *config.forced_choice
            : choose_experiment(sel.decision.b_hat, sel.decision.var_rct, sel.decision.var_pooled);
        sel.pooled_fits = std::move(pooled);
    } catch (const Error& e) {
        sel.decision.choice = Experiment::RctOnly;
        sel.decision.diagnostic = e.what();
        sel.pooled_fits.reset();
    }
    return sel;
}

}  // namespace

FoldDecision select_experiment(const StudyDataset& train, const SelectorConfig& config,
                               const RandomStream& stream, int fold)
{
    config.validate();
    const bool have_rwd = std::any_of(train.begin(), train.end(), [](const auto& r) { return !r.is_rct(); });
    return select_internal(train, config, stream, fold, have_rwd).decision;
}

Interval mc_ci(double psi_hat, double v_hat, double b_bar, int draws, double level, const RandomStream& stream)
{
    if (draws <= 0)
        throw InvalidParameter("need a positive number of Monte Carlo draws");
    if (!(v_hat >= 0.0))
        throw InvalidParameter("variance must be non-negative");
    Rng rng = stream.generator();
    const double sd = std::sqrt(v_hat);
    const auto n = static_cast<std::size_t>(draws);
    std::vector<double> u(n);
    for (std::size_t d = 0; d < n; ++d)
        u[d] = std::clamp((static_cast<double>(d) + rng.uniform()) / static_cast<double>(n), 1e-300, 1.0 - 1e-16);
    const auto quantile = [&](double p) {
        const double h = static_cast<double>(n - 1) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, n - 1);
        const double q_lo = symmetric_mixture_quantile(u[lo], b_bar, sd);
        if (hi == lo)
            return q_lo;
        return q_lo + (h - static_cast<double>(lo)) * (symmetric_mixture_quantile(u[hi], b_bar, sd) - q_lo);
    };
    const double alpha = 1.0 - level;
    return {psi_hat + quantile(alpha / 2.0), psi_hat + quantile(1.0 - alpha / 2.0)};
}

Interval mc_ci(const std::vector<FoldEstimate>& fold_estimates, const std::vector<FoldDecision>& decisions,
               const SelectorConfig& config, const RandomStream& stream)
{
    if (fold_estimates.empty() || fold_estimates.size() != decisions.size())
        throw InvalidParameter("fold estimates and decisions must be nonempty and aligned");
    const auto V = static_cast<double>(fold_estimates.size());
    double psi = 0.0, v = 0.0, b = 0.0;
    for (std::size_t k = 0; k < fold_estimates.size(); ++k) {
        psi += fold_estimates[k].psi_v;
        v += fold_estimates[k].var_v;
        if (decisions[k].choice == Experiment::Pooled)
            b += decisions[k].b_hat;
    }
    return mc_ci(psi / V, v / (V * V), b / V, config.mc_draws, config.level, stream);
}

EsCvtmleResult estimate_hybrid(const StudyDataset& rct, const StudyDataset& rwd, const SelectorConfig& config,
                               const RandomStream& stream)
{
    config.validate();
    const bool have_rwd = !rwd.empty();
    const StudyDataset data = have_rwd ? pool(rct, rwd) : rct;
    const FoldAssignment folds = make_folds(data, config.V, fold_stream(stream));

    EsCvtmleResult out;
    double psi_pound_sum = 0.0, nco_sum = 0.0;
    int psi_pound_n = 0, nco_n = 0, pooled_n = 0;
    std::string last_error;
    for (int v = 0; v < config.V; ++v) {
        const auto train = fold_split(data, folds, v, false);
        const auto validate = fold_split(data, folds, v, true);
        try {
            FoldSelection sel = select_internal(train, config, stream, v, have_rwd);
            const bool pooled = sel.decision.choice == Experiment::Pooled;
            const auto validate_used = pooled
                ? validate
                : validate.subset([&](std::size_t i) { return validate[i].is_rct(); });
            out.fold_estimates.push_back(tmle_rd(validate_used, pooled ? *sel.pooled_fits : sel.rct_fits));
            if (sel.decision.psi_pound) {
                psi_pound_sum += *sel.decision.psi_pound;
                ++psi_pound_n;
            }
            if (sel.decision.nco_ate) {
                nco_sum += *sel.decision.nco_ate;
                ++nco_n;
            }
            pooled_n += pooled ? 1 : 0;
            out.decisions.push_back(std::move(sel.decision));
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    if (out.fold_estimates.empty())
        throw EstimationFailure("every fold failed: " + last_error);

    const auto V = static_cast<double>(out.fold_estimates.size());
    double psi = 0.0, var = 0.0;
    for (const auto& f : out.fold_estimates) {
        psi += f.psi_v;
        var += f.var_v;
    }
    psi /= V;
    var /= V * V;
    const Interval ci = mc_ci(out.fold_estimates, out.decisions, config, stream.child("mc_ci"));
    out.estimate = EstimateWithCI::make(psi, std::sqrt(var), {std::min(ci.lower, psi), std::max(ci.upper, psi)},
                                        Estimand::Hybrid);
    out.rwd_inclusion_fraction = pooled_n / static_cast<double>(config.V);
    out.psi_pound_avg = psi_pound_n ? psi_pound_sum / psi_pound_n : 0.0;
    if (nco_n)
        out.nco_ate_avg = nco_sum / nco_n;
    return out;
}

}  // namespace hybridsim
