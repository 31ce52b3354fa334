#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveysynth/likelihood.hpp"
#include "surveysynth/model.hpp"
#include "surveysynth/rng.hpp"

namespace surveysynth {

class SamplerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Diagnostics {
    std::map<std::string, double> r_hat; // keyed theta[t], sigma_sq, pi_sq, gamma[k][j]
    std::map<std::string, double> ess;
    bool converged = true;               // every r_hat <= 1.1
};

inline constexpr double kRhatThreshold = 1.1;

struct ChainResult {
    std::vector<LatentState> draws;
    /// Post burn-in acceptance rate per block group.
    std::map<std::string, double> acceptance;
    /// Log proposal scales when adaptation stopped, and when the run ended.
    std::vector<double> scales_after_burn_in;
    std::vector<double> scales_final;
};

/// Starting state: theta from the pooled anchor surveys' empirical logits,
/// variances at their prior medians, gamma at zero, plus small jitter.
LatentState initial_state(const SurveyPanel& panel, const ModelSpec& spec, Rng& rng);

/// One adaptive Metropolis-within-Gibbs chain. Scalar random-walk updates
/// for every theta_t and gamma entry, log-scale updates for the variances,
/// and joint shift moves along the theta/gamma ridges that the biased
/// surveys leave flat. Scales adapt during burn-in only.
ChainResult run_chain(const SurveyPanel& panel, const ModelSpec& spec, const SamplerSettings& settings,
                      std::uint64_t chain_seed);

std::uint64_t chain_seed(const SamplerSettings& settings, int chain);

struct ChainRun {
    ChainDraws draws;
    Diagnostics diagnostics;
    std::vector<ChainResult> chains;
};

/// settings.n_chains independent chains; Exec::parallel runs them as
/// OpenMP tasks, Exec::serial is the reference. Results are identical.
ChainRun run_chains(const SurveyPanel& panel, const ModelSpec& spec, const SamplerSettings& settings,
                    Exec exec = Exec::parallel);

/// Per-chain traces of every scalar parameter, keyed as in Diagnostics.
std::map<std::string, std::vector<std::vector<double>>> scalar_traces(const ChainDraws& draws);

Diagnostics diagnose(const ChainDraws& draws);

enum class Transform { rate, natural };

/// Posterior medians and equal-tailed (alpha/2, 1 - alpha/2) intervals.
/// With Transform::rate the per-time rows are inv_logit(theta_t); with
/// Transform::natural they are theta_t. Parameter rows cover sigma^2, pi^2,
/// gamma and phi_kt of every biased survey.
SummaryTable summarize(const ChainDraws& draws, const ModelSpec& spec, double alpha,
                       Transform transform = Transform::rate);

} // namespace surveysynth
