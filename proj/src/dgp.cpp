#include "hybridsim/dgp.hpp"

#include "hybridsim/numerics.hpp"

#include <cmath>

namespace hybridsim {

void DgpConfig::validate() const
{
    if (n_rct1 == 0 || n_rwd == 0 || n_rct2 == 0)
        throw InvalidParameter("sample sizes must be positive");
    if (!(noise_sd >= 0.0))
        throw InvalidParameter("noise sd must be non-negative");
    if (!(rand_prob > 0.0 && rand_prob < 1.0))
        throw InvalidParameter("randomization probability must lie in (0, 1)");
    if (outcome_coefs.slopes.size() != 2 || censor_coefs.slopes.size() != 2)
        throw InvalidParameter("coefficient vectors must have two slopes (W1, W2)");
    if (!std::isfinite(bias_b))
        throw InvalidParameter("bias must be finite");
}

BiasGrid bias_grid()
{
    BiasGrid grid{};
    grid.values[0] = 0.0;
    for (int k = 1; k <= 10; ++k) {
        grid.values[static_cast<std::size_t>(k)] = k * 0.065;
        grid.values[static_cast<std::size_t>(10 + k)] = -k * 0.17;
    }
    return grid;
}

std::size_t BiasGrid::index_of(double b) const
{
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::abs(values[i] - b) <= 1e-12)
            return i;
    throw InvalidParameter("bias value " + std::to_string(b) + " is not on the bias grid");
}

namespace {

// Every subject consumes the same draws in the same order whatever the bias
// or NCO flag, so datasets generated from one stream at different B share
// covariates, noise and uniforms.
SubjectRecord draw_subject(Rng& rng, Source s, const DgpConfig& cfg, double bias_outcome,
                           double bias_nco)
{
    SubjectRecord r;
    r.s = s;
    r.w1 = rng.normal();
    r.w2 = rng.normal();
    if (s == Source::Rct)
        r.a = rng.bernoulli(cfg.rand_prob) ? 1 : 0;
    const double u_y = rng.normal(0.0, cfg.noise_sd);
    const double u_nco = rng.normal(0.0, cfg.noise_sd);
    const double w[2] = {r.w1, r.w2};
    const double base = cfg.outcome_coefs.linear_predictor(w);
    const int y = rng.bernoulli(expit(base + u_y + bias_outcome)) ? 1 : 0;
    const int nco = rng.bernoulli(expit(base + u_nco + bias_nco)) ? 1 : 0;
    const double keep = expit(cfg.censor_coefs.linear_predictor(w) +
                              (s == Source::Rct ? cfg.rct_bonus : 0.0));
    r.c = rng.bernoulli(1.0 - keep) ? 1 : 0;
    r.c_nco = rng.bernoulli(1.0 - keep) ? 1 : 0;
    if (r.c == 0)
        r.y_obs = y;
    if (r.c_nco == 0)
        r.nco_obs = nco;
    return r;
}

}  // namespace

StudyDataset generate_rct(std::size_t n, const RandomStream& stream, const DgpConfig& config,
                          DatasetLabel label)
{
    if (n == 0)
        throw InvalidParameter("RCT sample size must be positive");
    Rng rng = stream.generator();
    std::vector<SubjectRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        records.push_back(draw_subject(rng, Source::Rct, config, 0.0, 0.0));
    return StudyDataset(std::move(records), label);
}

StudyDataset generate_rwd(std::size_t n, double bias_b, bool nco_affected, const RandomStream& stream,
                          const DgpConfig& config)
{
    if (n == 0)
        throw InvalidParameter("real-world sample size must be positive");
    Rng rng = stream.generator();
    std::vector<SubjectRecord> records;
    records.reserve(n);
    const double nco_shift = nco_affected ? bias_b : 0.0;
    for (std::size_t i = 0; i < n; ++i)
        records.push_back(draw_subject(rng, Source::RealWorld, config, bias_b, nco_shift));
    return StudyDataset(std::move(records), DatasetLabel::Rwd);
}

namespace {

template <typename F>
void for_each_linear_predictor(std::size_t n_mc, const RandomStream& stream, const DgpConfig& cfg, F&& f)
{
    Rng rng = stream.generator();
    for (std::size_t i = 0; i < n_mc; ++i) {
        const double w[2] = {rng.normal(), rng.normal()};
        const double u = rng.normal(0.0, cfg.noise_sd);
        f(cfg.outcome_coefs.linear_predictor(w) + u);
    }
}

double rwd_weight(const DgpConfig& cfg)
{
    const double n_rwd = static_cast<double>(cfg.n_rwd);
    return n_rwd / (n_rwd + 0.5 * static_cast<double>(cfg.n_rct1));
}

}  // namespace

double oracle_control_risk(double bias_b, std::size_t n_mc, const RandomStream& stream,
                           const DgpConfig& config)
{
    if (n_mc == 0)
        throw InvalidParameter("Monte Carlo size must be positive");
    double sum = 0.0;
    for_each_linear_predictor(n_mc, stream, config, [&](double eta) { sum += expit(eta + bias_b); });
    return sum / static_cast<double>(n_mc);
}

std::array<double, 21> oracle_true_bias_grid(std::size_t n_mc, const DgpConfig& config,
                                             std::uint64_t seed)
{
    if (n_mc == 0)
        throw InvalidParameter("Monte Carlo size must be positive");
    const BiasGrid grid = bias_grid();
    std::array<double, 21> diff_sum{};
    for_each_linear_predictor(n_mc, RandomStream(seed).child("oracle"), config, [&](double eta) {
        const double base = expit(eta);
        for (std::size_t k = 1; k < grid.values.size(); ++k)
            diff_sum[k] += expit(eta + grid.values[k]) - base;
    });
    std::array<double, 21> out{};
    const double w = rwd_weight(config);
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = -w * diff_sum[k] / static_cast<double>(n_mc);
    return out;
}

double oracle_true_bias(double bias_b, std::size_t n_mc, const DgpConfig& config, std::uint64_t seed)
{
    if (n_mc == 0)
        throw InvalidParameter("Monte Carlo size must be positive");
    if (bias_b == 0.0)
        return 0.0;
    double diff = 0.0;
    for_each_linear_predictor(n_mc, RandomStream(seed).child("oracle"), config,
                              [&](double eta) { diff += expit(eta + bias_b) - expit(eta); });
    return -rwd_weight(config) * diff / static_cast<double>(n_mc);
}

double marginal_rate(const DgpConfig& config, ControlArm arm, std::size_t n_mc, std::uint64_t seed)
{
    const double b = arm == ControlArm::RctControl ? 0.0 : config.bias_b;
    return oracle_control_risk(b, n_mc, RandomStream(seed).child("marginal_rate"), config);
}

double marginal_censoring_rate(const DgpConfig& config, Source source, std::size_t n_mc,
                               std::uint64_t seed)
{
    if (n_mc == 0)
        throw InvalidParameter("Monte Carlo size must be positive");
    Rng rng = RandomStream(seed).child("censoring_rate").generator();
    const double bonus = source == Source::Rct ? config.rct_bonus : 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n_mc; ++i) {
        const double w[2] = {rng.normal(), rng.normal()};
        sum += 1.0 - expit(config.censor_coefs.linear_predictor(w) + bonus);
    }
    return sum / static_cast<double>(n_mc);
}

}  // namespace hybridsim
