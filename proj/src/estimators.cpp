#include "hybridsim/estimators.hpp"

#include "hybridsim/logistic.hpp"
#include "hybridsim/numerics.hpp"

#include <cmath>

namespace hybridsim {

std::string_view to_string(Experiment e)
{
    return e == Experiment::RctOnly ? "RctOnly" : "Pooled";
}

EstimateWithCI unadjusted_rd(const StudyDataset& dataset, double level)
{
    double events[2] = {0.0, 0.0};
    double counts[2] = {0.0, 0.0};
    for (const auto& r : dataset) {
        if (r.censored(OutcomeKind::Primary))
            continue;
        counts[r.a] += 1.0;
        events[r.a] += *r.y_obs;
    }
    if (counts[0] == 0.0 || counts[1] == 0.0)
        throw EmptyArm("unadjusted risk difference needs uncensored subjects in both arms");
    const double p1 = events[1] / counts[1];
    const double p0 = events[0] / counts[0];
    const double se = std::sqrt(p1 * (1.0 - p1) / counts[1] + p0 * (1.0 - p0) / counts[0]);
    return EstimateWithCI::make(p1 - p0, se, wald_ci(p1 - p0, se, level), Estimand::RctUnadj);
}

NuisanceFits fit_nuisances(const StudyDataset& train, Experiment experiment, OutcomeKind outcome,
                           const EstimatorConfig& config, const RandomStream& stream,
                           const std::optional<Predictor>& treatment)
{
    NuisanceFits fits;
    fits.outcome = outcome;
    fits.experiment = experiment;

    const auto q = super_learn(NuisanceTask::Outcome, train, config.inner_V, stream.child("qbar"), outcome);
    fits.qbar = q.predictor;
    fits.fell_back = q.fell_back;

    if (treatment) {
        fits.g = *treatment;
    } else {
        const auto g = super_learn(NuisanceTask::Treatment, train, config.inner_V, stream.child("g"),
                                   outcome, config.bounds);
        fits.g = g.predictor;
        fits.fell_back = fits.fell_back || g.fell_back;
    }

    const auto censoring_task = experiment == Experiment::RctOnly ? NuisanceTask::CensoringRct
                                                                   : NuisanceTask::CensoringPooled;
    const auto pi = super_learn(censoring_task, train, config.inner_V, stream.child("pi"), outcome,
                                config.bounds);
    fits.pi = pi.predictor;
    fits.fell_back = fits.fell_back || pi.fell_back;
    return fits;
}

namespace {

// One-parameter logistic fluctuation through the origin with an offset.
double fluctuate(const std::vector<double>& clever, const std::vector<double>& offset,
                 const std::vector<double>& y)
{
    if (y.empty())
        return 0.0;
    const Eigen::MatrixXd h = Eigen::Map<const Eigen::VectorXd>(clever.data(),
                                                                static_cast<Eigen::Index>(clever.size()));
    LogisticOptions opts;
    opts.intercept = false;
    const LogisticFit fit = fit_logistic(h, y, offset, {}, opts);
    if (!fit.usable())
        throw EstimationFailure("targeting step did not converge");
    return fit.coefficients.slopes[0];
}

FoldEstimate finish(std::vector<double> ic, std::vector<double> epsilon, double psi, bool warning)
{
    FoldEstimate est;
    est.psi_v = psi;
    est.n_v = ic.size();
    est.ic_mean = mean(ic);
    est.var_v = variance(ic) / static_cast<double>(ic.size());
    est.epsilon = std::move(epsilon);
    est.positivity_warning = warning;
    return est;
}

}  // namespace

FoldEstimate tmle_rd(const StudyDataset& validate, const NuisanceFits& fits)
{
    if (validate.count_if([](const SubjectRecord& r) { return r.a == 1; }) == 0)
        throw NoTreatedInValidation("validation sample has no treated subjects");
    const OutcomeKind kind = fits.outcome;
    const std::size_t n = validate.size();
    const double floor = fits.g.bounds().lower;

    std::vector<double> logit_q1(n), logit_q0(n), h1(n), h0(n);
    std::vector<double> clever, offset, y;
    bool warning = false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = validate[i];
        const FeatureRow row = features_of(r);
        const double g1 = fits.g.predict(row);
        const double pi1 = fits.pi.predict(with_treatment(row, 1));
        const double pi0 = fits.pi.predict(with_treatment(row, 0));
        warning = warning || g1 * pi1 < floor || (1.0 - g1) * pi0 < floor;
        h1[i] = 1.0 / (g1 * pi1);
        h0[i] = -1.0 / ((1.0 - g1) * pi0);
        logit_q1[i] = logit(fits.qbar.predict(with_treatment(row, 1)));
        logit_q0[i] = logit(fits.qbar.predict(with_treatment(row, 0)));
        if (!r.censored(kind)) {
            clever.push_back(r.a ? h1[i] : h0[i]);
            offset.push_back(r.a ? logit_q1[i] : logit_q0[i]);
            y.push_back(r.outcome(kind));
        }
    }
    const double eps = fluctuate(clever, offset, y);

    std::vector<double> q1(n), q0(n);
    double psi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        q1[i] = expit(logit_q1[i] + eps * h1[i]);
        q0[i] = expit(logit_q0[i] + eps * h0[i]);
        psi += q1[i] - q0[i];
    }
    psi /= static_cast<double>(n);

    std::vector<double> ic(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = validate[i];
        double residual_term = 0.0;
        if (!r.censored(kind)) {
            const double qa = r.a ? q1[i] : q0[i];
            residual_term = (r.a ? h1[i] : h0[i]) * (r.outcome(kind) - qa);
        }
        ic[i] = residual_term + q1[i] - q0[i] - psi;
    }
    return finish(std::move(ic), {eps}, psi, warning);
}

FoldEstimate nco_ate(const StudyDataset& validate, const NuisanceFits& fits)
{
    if (fits.outcome != OutcomeKind::NegativeControl)
        throw InvalidParameter("nco_ate needs nuisances fitted on the negative control outcome");
    return tmle_rd(validate, fits);
}

PsiPoundFits fit_psi_pound_nuisances(const StudyDataset& train, const NuisanceFits& pooled_fits,
                                     const EstimatorConfig& config, const RandomStream& stream)
{
    PsiPoundFits fits;
    fits.g = pooled_fits.g;
    fits.pi_pooled = pooled_fits.pi;

    const auto rct_controls = train.subset([&](std::size_t i) { return train[i].is_rct() && train[i].a == 0; });
    const auto all_controls = train.subset([&](std::size_t i) { return train[i].a == 0; });
    const auto rct = train.subset([&](std::size_t i) { return train[i].is_rct(); });
    if (rct_controls.empty())
        throw NoRctControlsInValidation("training split has no RCT controls");

    fits.q_rct_control = super_learn(NuisanceTask::Outcome, rct_controls, config.inner_V,
                                     stream.child("q_rct_control"))
                             .predictor;
    fits.q_pooled_control = super_learn(NuisanceTask::Outcome, all_controls, config.inner_V,
                                        stream.child("q_pooled_control"))
                                .predictor;
    fits.pi_rct = super_learn(NuisanceTask::CensoringRct, rct, config.inner_V, stream.child("pi_rct"),
                              OutcomeKind::Primary, config.bounds)
                      .predictor;

    LearningProblem membership;
    membership.bounds = config.bounds;
    membership.library = {{LearnerKind::Logistic, {Feature::W1, Feature::W2}}, {LearnerKind::SampleMean, {}}};
    for (const auto& r : train) {
        membership.rows.push_back(features_of(r));
        membership.target.push_back(r.is_rct() && r.a == 0 ? 1.0 : 0.0);
    }
    fits.p_rct_control = super_learn(membership, config.inner_V, stream.child("p_rct_control")).predictor;
    return fits;
}

FoldEstimate psi_pound(const StudyDataset& validate, const PsiPoundFits& fits)
{
    if (validate.count_if([](const SubjectRecord& r) { return r.is_rct() && r.a == 0; }) == 0)
        throw NoRctControlsInValidation("validation sample has no RCT controls");
    const std::size_t n = validate.size();
    const double floor = fits.g.bounds().lower;

    std::vector<double> logit_rct(n), logit_pool(n), h_rct(n), h_pool(n);
    std::vector<double> c1, o1, y1, c2, o2, y2;
    bool warning = false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = validate[i];
        const FeatureRow row = features_of(r);
        const FeatureRow control_row = with_treatment(row, 0);
        const double p_rct = fits.p_rct_control.predict(row);
        const double pi_rct = fits.pi_rct.predict(control_row);
        const double p_control = 1.0 - fits.g.predict(row);
        const double pi_control = fits.pi_pooled.predict(control_row);
        warning = warning || p_rct * pi_rct < floor || p_control * pi_control < floor;
        h_rct[i] = 1.0 / (p_rct * pi_rct);
        h_pool[i] = 1.0 / (p_control * pi_control);
        logit_rct[i] = logit(fits.q_rct_control.predict(control_row));
        logit_pool[i] = logit(fits.q_pooled_control.predict(control_row));
        if (r.a == 0 && !r.censored(OutcomeKind::Primary)) {
            c2.push_back(h_pool[i]);
            o2.push_back(logit_pool[i]);
            y2.push_back(*r.y_obs);
            if (r.is_rct()) {
                c1.push_back(h_rct[i]);
                o1.push_back(logit_rct[i]);
                y1.push_back(*r.y_obs);
            }
        }
    }
    const double eps_rct = fluctuate(c1, o1, y1);
    const double eps_pool = fluctuate(c2, o2, y2);

    std::vector<double> q_rct(n), q_pool(n);
    double psi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        q_rct[i] = expit(logit_rct[i] + eps_rct * h_rct[i]);
        q_pool[i] = expit(logit_pool[i] + eps_pool * h_pool[i]);
        psi += q_rct[i] - q_pool[i];
    }
    psi /= static_cast<double>(n);

    std::vector<double> ic(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = validate[i];
        double residual = 0.0;
        if (r.a == 0 && !r.censored(OutcomeKind::Primary)) {
            const double y = *r.y_obs;
            if (r.is_rct())
                residual += h_rct[i] * (y - q_rct[i]);
            residual -= h_pool[i] * (y - q_pool[i]);
        }
        ic[i] = residual + q_rct[i] - q_pool[i] - psi;
    }
    return finish(std::move(ic), {eps_rct, eps_pool}, psi, warning);
}

RandomStream nuisance_stream(const RandomStream& stream, int v, Experiment experiment)
{
    return stream.child("fold", static_cast<std::uint64_t>(v)).child(to_string(experiment));
}

RandomStream fold_stream(const RandomStream& stream) { return stream.child("folds"); }

CvTmleResult cv_tmle(const StudyDataset& dataset, Experiment experiment, int V,
                     const EstimatorConfig& config, const RandomStream& stream, double level)
{
    const FoldAssignment folds = make_folds(dataset, V, fold_stream(stream));
    CvTmleResult out;
    double psi = 0.0, var = 0.0;
    for (int v = 0; v < V; ++v) {
        const auto train = fold_split(dataset, folds, v, false);
        const auto validate = fold_split(dataset, folds, v, true);
        const auto fits = fit_nuisances(train, experiment, OutcomeKind::Primary, config,
                                        nuisance_stream(stream, v, experiment));
        out.folds.push_back(tmle_rd(validate, fits));
        psi += out.folds.back().psi_v;
        var += out.folds.back().var_v;
    }
    psi /= V;
    var /= static_cast<double>(V) * V;
    const double se = std::sqrt(var);
    out.estimate = EstimateWithCI::make(psi, se, wald_ci(psi, se, level),
                                        experiment == Experiment::RctOnly ? Estimand::RctAdj : Estimand::RctRwd);
    return out;
}

EstimateWithCI naive_pooled_rd(const StudyDataset& rct, const StudyDataset& rwd, int V,
                               const RandomStream& stream, const EstimatorConfig& config)
{
    return cv_tmle(pool(rct, rwd), Experiment::Pooled, V, config, stream).estimate;
}

}  // namespace hybridsim
