#pragma once

#include "hybridsim/logistic.hpp"
#include "hybridsim/random_stream.hpp"
#include "hybridsim/trial_data.hpp"

#include <array>
#include <string>
#include <vector>

namespace hybridsim {

enum class Feature : std::uint8_t { A = 0, W1 = 1, W2 = 2, S = 3 };

/// (a, w1, w2, s) for one record.
using FeatureRow = std::array<double, 4>;

inline FeatureRow features_of(const SubjectRecord& r)
{
    return {static_cast<double>(r.a), r.w1, r.w2, static_cast<double>(r.s)};
}

inline FeatureRow with_treatment(FeatureRow row, int a)
{
    row[0] = static_cast<double>(a);
    return row;
}

struct Bounds {
    double lower;
    double upper;

    double clamp(double p) const { return p < lower ? lower : (p > upper ? upper : p); }
};

/// Bounds for g and censoring predictions.
inline constexpr Bounds kDefaultPropensityBounds{0.01, 0.99};
/// Outcome regressions only need to stay strictly inside (0, 1).
inline constexpr Bounds kOutcomeBounds{1e-9, 1.0 - 1e-9};

/// A fitted binary regression: either a constant or a logistic model on a
/// subset of features. Predictions are clamped to `bounds`.
class Predictor {
public:
    static Predictor constant(double p, Bounds bounds);
    static Predictor logistic(CoefficientVector coefs, std::vector<Feature> features, Bounds bounds);

    double predict(const FeatureRow& row) const;
    bool is_constant() const { return features_.empty(); }
    const std::vector<Feature>& features() const { return features_; }
    const CoefficientVector& coefficients() const { return coefs_; }
    Bounds bounds() const { return bounds_; }
    std::string describe() const;

private:
    CoefficientVector coefs_;
    std::vector<Feature> features_;
    double constant_ = 0.5;
    Bounds bounds_{0.0, 1.0};
};

enum class LearnerKind { SampleMean, Logistic };

struct Candidate {
    LearnerKind kind;
    std::vector<Feature> features;  // logistic only
};

struct LearningProblem {
    std::vector<FeatureRow> rows;
    std::vector<double> target;
    std::vector<Candidate> library;
    Bounds bounds = kDefaultPropensityBounds;
};

struct SuperLearnerResult {
    Predictor predictor = Predictor::constant(0.5, kDefaultPropensityBounds);
    std::size_t winner = 0;
    /// Inner-CV mean negative log-likelihood per candidate (empty when the
    /// library has a single candidate and no CV was run).
    std::vector<double> cv_risk;
    /// A logistic fit failed to converge and the sample mean was used instead.
    bool fell_back = false;
};

/// Discrete super learner: picks the candidate with the smallest inner-CV
/// negative Bernoulli log-likelihood and refits it on all rows. Ties go to
/// the sample mean.
SuperLearnerResult super_learn(const LearningProblem& problem, int inner_V, const RandomStream& stream);

/// While alive, super_learn calls on this thread are memoized by a digest of
/// the whole problem (rows, target, library, bounds, inner_V, stream key), so
/// results equal the uncached ones. Useful when many analyses share data.
class FitCacheScope {
public:
    FitCacheScope();
    ~FitCacheScope();
    FitCacheScope(const FitCacheScope&) = delete;
    FitCacheScope& operator=(const FitCacheScope&) = delete;

    std::size_t hits() const;
    std::size_t misses() const;

    struct State;

private:
    State* state_;
    State* previous_;
};

enum class NuisanceTask {
    Outcome,          // E[Y | A, W] on complete cases; logistic only
    Treatment,        // P(A = 1 | W); logistic or sample mean
    CensoringRct,     // P(C = 0); sample mean only
    CensoringPooled,  // P(C = 0 | A, W); logistic or sample mean
};

SuperLearnerResult super_learn(NuisanceTask task, const StudyDataset& data, int inner_V,
                               const RandomStream& stream, OutcomeKind kind = OutcomeKind::Primary,
                               Bounds propensity_bounds = kDefaultPropensityBounds);

}  // namespace hybridsim
