#pragma once

#include <span>
#include <vector>

namespace surveysynth {

/// Split-chain potential scale reduction factor. Each chain is halved and
/// the between/within variance ratio taken over the halves. Zero-variance
/// input returns 1; zero within-variance with between-chain spread returns
/// +inf. Requires at least one chain of length >= 4 (all equal length).
double r_hat(const std::vector<std::vector<double>>& chains);

/// Multi-chain effective sample size with Geyer's initial monotone
/// sequence estimator.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double prob);

} // namespace surveysynth
