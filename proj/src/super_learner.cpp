#include "hybridsim/super_learner.hpp"

#include "hybridsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <bit>
#include <sstream>
#include <unordered_map>

namespace hybridsim {

Predictor Predictor::constant(double p, Bounds bounds)
{
    Predictor out;
    out.constant_ = p;
    out.bounds_ = bounds;
    return out;
}

Predictor Predictor::logistic(CoefficientVector coefs, std::vector<Feature> features, Bounds bounds)
{
    if (coefs.slopes.size() != features.size())
        throw InvalidParameter("coefficient count does not match feature count");
    Predictor out;
    out.coefs_ = std::move(coefs);
    out.features_ = std::move(features);
    out.bounds_ = bounds;
    return out;
}

double Predictor::predict(const FeatureRow& row) const
{
    if (features_.empty())
        return bounds_.clamp(constant_);
    double eta = coefs_.intercept;
    for (std::size_t j = 0; j < features_.size(); ++j)
        eta += coefs_.slopes[j] * row[static_cast<std::size_t>(features_[j])];
    return bounds_.clamp(expit(eta));
}

std::string Predictor::describe() const
{
    static constexpr const char* names[] = {"A", "W1", "W2", "S"};
    std::ostringstream os;
    if (features_.empty()) {
        os << "mean(" << constant_ << ")";
        return os.str();
    }
    os << "logit(" << coefs_.intercept;
    for (std::size_t j = 0; j < features_.size(); ++j)
        os << (coefs_.slopes[j] < 0 ? " - " : " + ") << std::abs(coefs_.slopes[j]) << "*"
           << names[static_cast<std::size_t>(features_[j])];
    os << ")";
    return os.str();
}

namespace {

Eigen::MatrixXd design(const std::vector<FeatureRow>& rows, const std::vector<Feature>& features)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(features.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < features.size(); ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][static_cast<std::size_t>(features[j])];
    return x;
}

double neg_log_lik(double y, double p)
{
    return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

struct CandidateFit {
    Predictor predictor = Predictor::constant(0.5, kDefaultPropensityBounds);
    Eigen::VectorXd beta;  // intercept first, for warm starts
    bool ok = true;
};

CandidateFit fit_candidate(const Candidate& cand, const Eigen::MatrixXd& x, std::span<const double> y,
                           Bounds bounds, const Eigen::VectorXd* start)
{
    CandidateFit out;
    if (cand.kind == LearnerKind::SampleMean) {
        out.predictor = Predictor::constant(mean(y), bounds);
        return out;
    }
    LogisticOptions opts;
    if (start)
        opts.start = *start;
    const LogisticFit fit = fit_logistic(x, y, {}, {}, opts);
    if (!fit.usable()) {
        out.ok = false;
        out.predictor = Predictor::constant(mean(y), bounds);
        return out;
    }
    out.beta.resize(static_cast<Eigen::Index>(fit.coefficients.slopes.size() + 1));
    out.beta[0] = fit.coefficients.intercept;
    for (std::size_t j = 0; j < fit.coefficients.slopes.size(); ++j)
        out.beta[static_cast<Eigen::Index>(j + 1)] = fit.coefficients.slopes[j];
    out.predictor = Predictor::logistic(fit.coefficients, cand.features, bounds);
    return out;
}

}  // namespace

struct FitCacheScope::State {
    struct KeyHash {
        std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const { return k.first; }
    };
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, SuperLearnerResult, KeyHash> entries;
    std::size_t hits = 0;
    std::size_t misses = 0;
};

namespace {

thread_local FitCacheScope::State* t_cache = nullptr;

class Digest {
public:
    void add(std::uint64_t v)
    {
        a_ = (a_ ^ v) * 0x100000001b3ULL;
        b_ = std::rotl(b_ + v * 0x9e3779b97f4a7c15ULL, 29) * 0xbf58476d1ce4e5b9ULL;
    }
    void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
    std::pair<std::uint64_t, std::uint64_t> value() const { return {a_, b_ ^ (b_ >> 31)}; }

private:
    std::uint64_t a_ = 0xcbf29ce484222325ULL;
    std::uint64_t b_ = 0x94d049bb133111ebULL;
};

std::pair<std::uint64_t, std::uint64_t> digest(const LearningProblem& problem, int inner_V,
                                               const RandomStream& stream)
{
    Digest d;
    d.add(static_cast<std::uint64_t>(problem.rows.size()));
    for (const auto& row : problem.rows)
        for (double v : row)
            d.add(v);
    for (double v : problem.target)
        d.add(v);
    for (const auto& c : problem.library) {
        d.add(static_cast<std::uint64_t>(c.kind) + 0x51);
        for (auto f : c.features)
            d.add(static_cast<std::uint64_t>(f));
    }
    d.add(problem.bounds.lower);
    d.add(problem.bounds.upper);
    d.add(static_cast<std::uint64_t>(inner_V));
    d.add(stream.key());
    return d.value();
}

SuperLearnerResult super_learn_uncached(const LearningProblem& problem, int inner_V, const RandomStream& stream);

}  // namespace

FitCacheScope::FitCacheScope() : state_(new State), previous_(t_cache) { t_cache = state_; }

FitCacheScope::~FitCacheScope()
{
    t_cache = previous_;
    delete state_;
}

std::size_t FitCacheScope::hits() const { return state_->hits; }
std::size_t FitCacheScope::misses() const { return state_->misses; }

SuperLearnerResult super_learn(const LearningProblem& problem, int inner_V, const RandomStream& stream)
{
    if (!t_cache)
        return super_learn_uncached(problem, inner_V, stream);
    const auto key = digest(problem, inner_V, stream);
    if (auto it = t_cache->entries.find(key); it != t_cache->entries.end()) {
        ++t_cache->hits;
        return it->second;
    }
    ++t_cache->misses;
    SuperLearnerResult result = super_learn_uncached(problem, inner_V, stream);
    t_cache->entries.emplace(key, result);
    return result;
}

namespace {

SuperLearnerResult super_learn_uncached(const LearningProblem& problem, int inner_V, const RandomStream& stream)
{
    const std::size_t n = problem.rows.size();
    if (n == 0 || problem.target.size() != n)
        throw EmptyInput("super learner needs a nonempty, aligned problem");
    if (problem.library.empty())
        throw InvalidParameter("super learner library is empty");
    if (inner_V < 2)
        throw InvalidParameter("inner fold count must be at least 2");

    SuperLearnerResult result;
    const std::size_t k = problem.library.size();

    std::vector<Eigen::MatrixXd> designs;
    std::vector<CandidateFit> full;
    designs.reserve(k);
    full.reserve(k);
    for (const auto& cand : problem.library) {
        designs.push_back(design(problem.rows, cand.features));
        full.push_back(fit_candidate(cand, designs.back(), problem.target, problem.bounds, nullptr));
    }

    std::size_t mean_index = k;
    for (std::size_t c = 0; c < k; ++c)
        if (problem.library[c].kind == LearnerKind::SampleMean)
            mean_index = c;

    if (k == 1 || n < static_cast<std::size_t>(inner_V)) {
        const std::size_t pick = (k == 1 || mean_index == k) ? 0 : mean_index;
        result.winner = pick;
        result.predictor = full[pick].predictor;
        result.fell_back = !full[pick].ok;
        return result;
    }

    std::vector<int> fold(n);
    {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i)
            order[i] = i;
        Rng rng = stream.generator();
        shuffle(order, rng);
        for (std::size_t pos = 0; pos < n; ++pos)
            fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(inner_V));
    }

    result.cv_risk.assign(k, 0.0);
    std::vector<bool> failed(k, false);
    for (std::size_t c = 0; c < k; ++c)
        failed[c] = !full[c].ok;

    for (int v = 0; v < inner_V; ++v) {
        std::vector<Eigen::Index> train_idx, valid_idx;
        std::vector<double> train_y;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold[i] == v) {
                valid_idx.push_back(static_cast<Eigen::Index>(i));
            } else {
                train_idx.push_back(static_cast<Eigen::Index>(i));
                train_y.push_back(problem.target[i]);
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (failed[c])
                continue;
            const Eigen::MatrixXd x_train = designs[c](train_idx, Eigen::all);
            const CandidateFit fit = fit_candidate(problem.library[c], x_train, train_y, problem.bounds,
                                                   full[c].beta.size() ? &full[c].beta : nullptr);
            if (!fit.ok) {
                failed[c] = true;
                continue;
            }
            for (auto i : valid_idx) {
                const auto u = static_cast<std::size_t>(i);
                result.cv_risk[c] += neg_log_lik(problem.target[u], fit.predictor.predict(problem.rows[u]));
            }
        }
    }

    std::size_t best = mean_index;
    double best_risk = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        result.cv_risk[c] /= static_cast<double>(n);
        if (failed[c])
            result.cv_risk[c] = std::numeric_limits<double>::infinity();
    }
    if (mean_index < k)
        best_risk = result.cv_risk[mean_index];
    for (std::size_t c = 0; c < k; ++c) {
        if (c == mean_index)
            continue;
        if (result.cv_risk[c] < best_risk) {
            best = c;
            best_risk = result.cv_risk[c];
        }
    }
    if (best == k) {
        // No sample-mean candidate and every logistic failed.
        result.fell_back = true;
        result.predictor = Predictor::constant(mean(problem.target), problem.bounds);
        return result;
    }
    result.winner = best;
    result.predictor = full[best].predictor;
    result.fell_back = std::any_of(failed.begin(), failed.end(), [](bool f) { return f; });
    return result;
}

}  // namespace

SuperLearnerResult super_learn(NuisanceTask task, const StudyDataset& data, int inner_V,
                               const RandomStream& stream, OutcomeKind kind, Bounds propensity_bounds)
{
    LearningProblem problem;
    problem.bounds = propensity_bounds;
    problem.rows.reserve(data.size());
    problem.target.reserve(data.size());
    bool treatment_varies = false;
    const int first_a = data.empty() ? 0 : data[0].a;
    for (const auto& r : data) {
        treatment_varies = treatment_varies || r.a != first_a;
        switch (task) {
        case NuisanceTask::Outcome:
            if (r.censored(kind))
                continue;
            problem.target.push_back(r.outcome(kind));
            break;
        case NuisanceTask::Treatment:
            problem.target.push_back(r.a);
            break;
        case NuisanceTask::CensoringRct:
        case NuisanceTask::CensoringPooled:
            problem.target.push_back(r.censored(kind) ? 0.0 : 1.0);
            break;
        }
        problem.rows.push_back(features_of(r));
    }
    if (problem.rows.empty())
        throw EmptyInput("no rows available for nuisance regression");

    const std::vector<Feature> covariates{Feature::W1, Feature::W2};
    std::vector<Feature> with_a{Feature::A, Feature::W1, Feature::W2};
    if (!treatment_varies)
        with_a = covariates;

    switch (task) {
    case NuisanceTask::Outcome:
        problem.bounds = kOutcomeBounds;
        problem.library = {{LearnerKind::Logistic, with_a}};
        break;
    case NuisanceTask::Treatment:
        problem.library = {{LearnerKind::Logistic, covariates}, {LearnerKind::SampleMean, {}}};
        break;
    case NuisanceTask::CensoringRct:
        problem.library = {{LearnerKind::SampleMean, {}}};
        break;
    case NuisanceTask::CensoringPooled:
        problem.library = {{LearnerKind::Logistic, with_a}, {LearnerKind::SampleMean, {}}};
        break;
    }
    return super_learn(problem, inner_V, stream);
}

}  // namespace hybridsim
