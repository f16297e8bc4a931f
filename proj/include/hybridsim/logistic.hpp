#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

namespace hybridsim {

struct CoefficientVector {
    double intercept = 0.0;
    std::vector<double> slopes;

    /// intercept + sum_j slopes[j] * x[j]
    double linear_predictor(std::span<const double> x) const;
};

enum class FitStatus {
    Converged,
    NonConvergence,
    Separation,  // coefficients hit the clamp; predictions are extreme
};

struct LogisticFit {
    CoefficientVector coefficients;
    FitStatus status = FitStatus::Converged;
    int iterations = 0;
    double gradient_norm = 0.0;

    bool usable() const { return status != FitStatus::NonConvergence; }
};

struct LogisticOptions {
    bool intercept = true;
    int max_iterations = 100;
    double tolerance = 1e-8;  // on the Euclidean norm of the log-likelihood gradient
    double clamp = 40.0;
    /// Starting point (intercept first when `intercept`); defaults to the
    /// intercept-only MLE.
    std::optional<Eigen::VectorXd> start;
};

/// Bernoulli-logit maximum likelihood by Newton-Raphson (IRLS) with step
/// halving. `covariates` is n x p without the intercept column; `offsets`
/// and `weights` may be empty.
LogisticFit fit_logistic(const Eigen::MatrixXd& covariates,
                         std::span<const double> outcomes,
                         std::span<const double> offsets = {},
                         std::span<const double> weights = {},
                         const LogisticOptions& options = {});

}  // namespace hybridsim
