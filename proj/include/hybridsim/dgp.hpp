#pragma once

#include "hybridsim/logistic.hpp"
#include "hybridsim/random_stream.hpp"
#include "hybridsim/trial_data.hpp"

#include <array>
#include <cstdint>

namespace hybridsim {

/// Simulation constants. Outcome and NCO logits are
///   -3.33 + 0.2 W1 - 0.4 W2 + U + B,  U ~ Normal(0, noise_sd),
/// censoring is Bernoulli(1 - expit(2.2 + W1 - W2 + 4.5 * 1{S = 0})).
/// Treatment never enters the outcome equation, so the true risk difference is 0.
struct DgpConfig {
    std::size_t n_rct1 = 3183;
    std::size_t n_rwd = 2483;
    std::size_t n_rct2 = 9500;
    double rand_prob = 0.5;
    CoefficientVector outcome_coefs{-3.33, {0.2, -0.4}};
    double noise_sd = 0.5;
    CoefficientVector censor_coefs{2.2, {1.0, -1.0}};
    double rct_bonus = 4.5;
    double bias_b = 0.0;
    /// true: B shifts the NCO logit as well as the outcome logit.
    bool nco_affected = true;

    void validate() const;
};

/// The 21 logit-scale bias values: index 0 is 0, indices 1..10 are
/// +k * 0.065 and indices 11..20 are -k * 0.17.
///
/// B > 0 raises real-world control risk, pushing the pooled risk difference
/// negative (away from the null of the shifted superiority test); B < 0 lowers
/// it (towards the null).
struct BiasGrid {
    std::array<double, 21> values;

    static constexpr std::size_t size() { return 21; }
    /// Index of `b` in the grid (exact up to 1e-12); throws InvalidParameter.
    std::size_t index_of(double b) const;
};

BiasGrid bias_grid();

StudyDataset generate_rct(std::size_t n, const RandomStream& stream,
                          const DgpConfig& config = {}, DatasetLabel label = DatasetLabel::Rct1);

StudyDataset generate_rwd(std::size_t n, double bias_b, bool nco_affected, const RandomStream& stream,
                          const DgpConfig& config = {});

/// mu(b) = E[expit(-3.33 + 0.2 W1 - 0.4 W2 + U_y + b)] by Monte Carlo.
double oracle_control_risk(double bias_b, std::size_t n_mc, const RandomStream& stream,
                           const DgpConfig& config = {});

/// True bias of the pooled-data risk difference,
/// -w_rwd * (mu(b) - mu(0)) with w_rwd = n_rwd / (n_rwd + n_rct1 / 2).
/// Common random numbers are used for mu(b) and mu(0).
double oracle_true_bias(double bias_b, std::size_t n_mc = 10'000'000,
                        const DgpConfig& config = {}, std::uint64_t seed = 0x0DDBA11);

/// Same quantity for every grid value from a single set of draws.
std::array<double, 21> oracle_true_bias_grid(std::size_t n_mc = 10'000'000,
                                             const DgpConfig& config = {},
                                             std::uint64_t seed = 0x0DDBA11);

enum class ControlArm { RctControl, RwdControl };

/// Monte Carlo marginal event probability of an uncensored control outcome.
double marginal_rate(const DgpConfig& config, ControlArm arm, std::size_t n_mc,
                     std::uint64_t seed = 0x5EED);

/// Monte Carlo probability that the primary outcome is censored.
double marginal_censoring_rate(const DgpConfig& config, Source source, std::size_t n_mc,
                               std::uint64_t seed = 0x5EED);

}  // namespace hybridsim
