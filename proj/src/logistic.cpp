#include "hybridsim/logistic.hpp"

#include "hybridsim/errors.hpp"
#include "hybridsim/numerics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <algorithm>
#include <cmath>

namespace hybridsim {

double CoefficientVector::linear_predictor(std::span<const double> x) const
{
    double eta = intercept;
    for (std::size_t j = 0; j < slopes.size(); ++j)
        eta += slopes[j] * x[j];
    return eta;
}

namespace {

double log_likelihood(const Eigen::ArrayXd& eta, const Eigen::ArrayXd& y, const Eigen::ArrayXd& w,
                      Eigen::ArrayXd& tail)
{
    // y * eta - log(1 + e^eta), written to avoid overflow
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double e = std::exp(-std::abs(eta[i]));
        tail[i] = e;
        ll += w[i] * (y[i] * eta[i] - (std::max(eta[i], 0.0) + std::log1p(e)));
    }
    return ll;
}

CoefficientVector unpack(const Eigen::VectorXd& beta, bool intercept)
{
    CoefficientVector coef;
    const Eigen::Index first = intercept ? 1 : 0;
    coef.intercept = intercept ? beta[0] : 0.0;
    coef.slopes.assign(beta.data() + first, beta.data() + beta.size());
    return coef;
}

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& covariates,
                         std::span<const double> outcomes,
                         std::span<const double> offsets,
                         std::span<const double> weights,
                         const LogisticOptions& options)
{
    const Eigen::Index n = covariates.rows();
    if (static_cast<std::size_t>(n) != outcomes.size())
        throw InvalidParameter("covariate rows and outcome length differ");
    if (!offsets.empty() && offsets.size() != outcomes.size())
        throw InvalidParameter("offset length differs from outcome length");
    if (!weights.empty() && weights.size() != outcomes.size())
        throw InvalidParameter("weight length differs from outcome length");

    const Eigen::Index p = covariates.cols() + (options.intercept ? 1 : 0);
    if (p == 0)
        throw InvalidParameter("model has no parameters");

    Eigen::MatrixXd x(n, p);
    if (options.intercept) {
        x.col(0).setOnes();
        x.rightCols(covariates.cols()) = covariates;
    } else {
        x = covariates;
    }
    const Eigen::Map<const Eigen::ArrayXd> y(outcomes.data(), n);
    const Eigen::ArrayXd off = offsets.empty()
        ? Eigen::ArrayXd::Zero(n)
        : Eigen::ArrayXd(Eigen::Map<const Eigen::ArrayXd>(offsets.data(), n));
    const Eigen::ArrayXd w = weights.empty()
        ? Eigen::ArrayXd::Ones(n)
        : Eigen::ArrayXd(Eigen::Map<const Eigen::ArrayXd>(weights.data(), n));
    if ((w < 0.0).any())
        throw InvalidParameter("weights must be non-negative");

    const double total_weight = w.sum();
    if (!(total_weight > 0.0))
        throw InvalidParameter("at least one observation needs positive weight");

    LogisticFit fit;

    // Constant outcome among weighted observations: the MLE is at infinity.
    const double weighted_events = (w * y).sum();
    if (options.intercept && (weighted_events <= 0.0 || weighted_events >= total_weight)) {
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        beta[0] = weighted_events <= 0.0 ? -options.clamp : options.clamp;
        fit.coefficients = unpack(beta, true);
        fit.status = FitStatus::Separation;
        return fit;
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (options.start && options.start->size() == p) {
        beta = *options.start;
    } else if (options.intercept) {
        beta[0] = logit(weighted_events / total_weight);
    }

    Eigen::ArrayXd eta = (x * beta).array() + off;
    Eigen::ArrayXd tail(n);  // exp(-|eta|), shared by the likelihood and the IRLS weights
    double ll = log_likelihood(eta, y, w, tail);
    fit.status = FitStatus::NonConvergence;

    Eigen::VectorXd grad(p);
    Eigen::MatrixXd hessian(p, p);
    Eigen::ArrayXd candidate_eta(n), candidate_tail(n);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        grad.setZero();
        hessian.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double e = tail[i];
            const double mu = eta[i] >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
            const double r = w[i] * (y[i] - mu);
            const double c = w[i] * mu * (1.0 - mu);
            for (Eigen::Index j = 0; j < p; ++j) {
                const double xij = x(i, j);
                grad[j] += r * xij;
                const double cx = c * xij;
                for (Eigen::Index k = 0; k <= j; ++k)
                    hessian(j, k) += cx * x(i, k);
            }
        }
        fit.gradient_norm = grad.norm();
        fit.iterations = iter;
        if (fit.gradient_norm <= options.tolerance) {
            fit.status = FitStatus::Converged;
            break;
        }
        const Eigen::VectorXd step = hessian.selfadjointView<Eigen::Lower>().ldlt().solve(grad);
        if (!step.allFinite())
            break;

        double scale = 1.0;
        Eigen::VectorXd candidate;
        double candidate_ll = -INFINITY;
        for (int halving = 0; halving < 30; ++halving) {
            candidate = beta + scale * step;
            candidate_eta = (x * candidate).array() + off;
            candidate_ll = log_likelihood(candidate_eta, y, w, candidate_tail);
            if (candidate_ll >= ll - 1e-12 * std::abs(ll))
                break;
            scale *= 0.5;
        }
        beta = std::move(candidate);
        eta.swap(candidate_eta);
        tail.swap(candidate_tail);
        ll = candidate_ll;

        if (beta.cwiseAbs().maxCoeff() > options.clamp) {
            beta = beta.cwiseMax(-options.clamp).cwiseMin(options.clamp);
            fit.status = FitStatus::Separation;
            fit.iterations = iter + 1;
            break;
        }
    }

    fit.coefficients = unpack(beta, options.intercept);
    return fit;
}

}  // namespace hybridsim
