#pragma once

#include <map>
#include <span>
#include <string>

#include "surveysynth/model.hpp"

namespace surveysynth {

/// Serial reference or OpenMP execution of a data-parallel kernel.
/// Both produce bit-identical results.
enum class Exec { serial, parallel };

struct LogDensityReport {
    double log_prior = 0.0;
    double log_lik = 0.0;
    double log_post = 0.0;
    /// theta, sigma_sq, gamma, pi_sq, likelihood
    std::map<std::string, double> per_block;
};

/// Time covariate entering the linear bias model at time index t.
double bias_time(const ModelSpec& spec, int t, int time_points);

double log_phi_value(const ModelSpec& spec, const LatentState& state, int k, int t);
/// Selection odds ratio of survey k at time t. Throws std::invalid_argument
/// when the state's gamma shape does not match the spec.
double phi_value(const ModelSpec& spec, const LatentState& state, int k, int t);

/// Log-density of theta_t given theta_{t-1} (truncated below when monotone).
double theta_increment_logpdf(double prev, double next, double sigma_sq, bool monotone);

double log_prior_theta(const LatentState& state, const ModelSpec& spec);
double log_prior_sigma(const LatentState& state, const ModelSpec& spec);
double log_prior_gamma(const LatentState& state, const ModelSpec& spec);
double log_prior_pi(const LatentState& state, const ModelSpec& spec);
double log_prior(const LatentState& state, const ModelSpec& spec);

/// Log-likelihood contribution of one observed cell given theta_t and
/// log(phi_kt).
double cell_log_lik(Count y, Count n, Count population, double theta, double log_phi,
                    bool exact_nchg);

/// Per-cell likelihood terms, row-major over (k, t - 1); missing cells get 0.
void cell_log_lik_terms(const LatentState& state, const SurveyPanel& panel, const ModelSpec& spec,
                        std::span<double> out, Exec exec = Exec::serial);

double log_likelihood(const LatentState& state, const SurveyPanel& panel, const ModelSpec& spec,
                      Exec exec = Exec::serial);

LogDensityReport log_posterior(const LatentState& state, const SurveyPanel& panel,
                               const ModelSpec& spec, Exec exec = Exec::serial);

} // namespace surveysynth
