#pragma once

#include <limits>

#include "surveysynth/model.hpp"
#include "surveysynth/rng.hpp"

namespace surveysynth {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// ln(p / (1 - p)); throws std::domain_error outside (0, 1).
double logit(double p);
double inv_logit(double x);
/// log(inv_logit(x)) without overflow or cancellation.
double log_inv_logit(double x);
/// log(1 - inv_logit(x)).
double log1m_inv_logit(double x);

/// Thread-safe log-gamma.
double log_gamma(double x);
double log_choose(Count n, Count k);

double normal_logpdf(double x, double mean, double var);
/// Standard normal cdf and its quantile.
double normal_cdf(double z);
double normal_quantile(double p);

/// Log-density of Normal(mean, var) restricted to [lower, upper].
/// Returns -inf outside the interval. Throws std::domain_error if var <= 0
/// or the interval is empty.
double truncnorm_logpdf(double x, double mean, double var, double lower = -kInf,
                        double upper = kInf);

/// Exact draw from Normal(mean, var) restricted to [lower, upper].
double truncnorm_sample(double mean, double var, double lower, double upper, Rng& rng);

/// Mean of the truncated normal, for tests and diagnostics.
double truncnorm_mean(double mean, double var, double lower, double upper);

/// Fisher's non-central hypergeometric: draw n from m1 "positive" and m2
/// "negative" units where a positive unit has odds ratio phi of selection.
struct NchgParams {
    Count m1 = 0;
    Count m2 = 0;
    Count n = 0;
    double phi = 1.0;

    Count support_min() const { return n - m2 > 0 ? n - m2 : 0; }
    Count support_max() const { return n < m1 ? n : m1; }
    void validate() const;
};

/// Most probable outcome (lowest one on ties).
Count nchg_mode(const NchgParams& params);
double nchg_logpmf(Count y, const NchgParams& params);
Count nchg_sample(const NchgParams& params, Rng& rng);
double nchg_mean(const NchgParams& params);

/// Central hypergeometric; the phi = 1 case of nchg_logpmf.
double hypergeometric_logpmf(Count y, Count m1, Count m2, Count n);

/// p * phi / (1 - p + p * phi): success probability of the large-population
/// approximation to the non-central hypergeometric.
double biased_success_prob(double p, double phi);

double binomial_logpmf(Count y, Count n, double p);
/// Binomial log-pmf parameterised by the logit of the success probability.
/// `log_coef` is log C(n, y), which callers may cache.
inline double binomial_logit_logpmf(Count y, Count n, double eta, double log_coef) {
    return log_coef + static_cast<double>(y) * log_inv_logit(eta) +
           static_cast<double>(n - y) * log1m_inv_logit(eta);
}

} // namespace surveysynth
