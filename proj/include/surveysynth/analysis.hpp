#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "surveysynth/datagen.hpp"
#include "surveysynth/likelihood.hpp"
#include "surveysynth/mcmc.hpp"
#include "surveysynth/model.hpp"

namespace surveysynth {

inline constexpr int kAlignWindowDays = 6;

struct AlignedPanel {
    SurveyPanel panel;
    std::vector<std::chrono::sys_days> dates; // benchmark date of each t (index t - 1)
    std::vector<std::string> warnings;
};

/// Builds the time grid from the benchmark survey's dates. A record of any
/// other survey dated within [d, d + 6] days of benchmark date d lands at
/// that index (the latest such d when windows overlap); the earliest record
/// wins when several share a cell. Unplaceable records are dropped with a
/// warning. Survey order follows first appearance in `records`.
AlignedPanel align_dates(const std::vector<DatedRecord>& records, const std::string& benchmark_label,
                         Count population);

/// Records dated at their benchmark dates; inverse of align_dates.
std::vector<DatedRecord> panel_records(const AlignedPanel& aligned);

/// Anchor `anchor_label` with phi = 1, every other survey with `biased`,
/// non-decreasing walk and theta_0 ~ Normal(-2, 1).
ModelSpec vaccine_model_spec(const SurveyPanel& panel, const std::string& anchor_label, BiasKind biased);

struct FitResult {
    SummaryTable table;
    Diagnostics diagnostics;
    std::map<std::string, double> acceptance;
    std::vector<std::pair<int, int>> saturated;
};

/// Full-data posterior; throws std::invalid_argument on a panel without
/// observed cells.
FitResult fit_full(const SurveyPanel& panel, const ModelSpec& spec, const SamplerSettings& settings,
                   double alpha = 0.05, Exec exec = Exec::parallel);

struct NowcastPoint {
    int t = 0;
    std::optional<SummaryRow> rate;
    std::optional<SummaryRow> sigma_sq;
    std::optional<SummaryRow> pi_sq;
    bool converged = false;
    std::string error;
};

/// For every t* in 1..T, fits the cells with t <= t* and keeps the row
/// for t*. Each t* is an independent job seeded by (settings.seed, t*).
std::vector<NowcastPoint> nowcast_series(const SurveyPanel& panel, const ModelSpec& spec,
                                         const SamplerSettings& settings, double alpha = 0.05,
                                         Exec exec = Exec::parallel);

/// Summary table assembled from now-cast rows (missing rows skipped).
SummaryTable nowcast_table(const std::vector<NowcastPoint>& points, double alpha);

struct RatioReport {
    std::vector<std::optional<double>> ratio; // per t (index t - 1)
    std::vector<int> flagged;                 // t with zero method width
    double mean = 0.0;
    double median = 0.0;
    int count = 0;
};

/// width(baseline) / width(method) at every t in `include` (all t of the
/// baseline when empty) where both rows exist.
RatioReport ci_width_ratio(const SummaryTable& baseline, const SummaryTable& method,
                           const std::vector<int>& include = {});

struct Coverage {
    int hits = 0;
    int total = 0;
    double fraction = 0.0;
};

/// A time-point is a hit when the credible interval intersects
/// [rate - margin, rate + margin]. Time-points without a benchmark are skipped.
Coverage coverage_vs_benchmark(const SummaryTable& method, const BenchmarkSeries& bench);

struct NiidRow {
    int t = 0;
    double p_hat_baseline = 0.0;
    double p_hat_method = 0.0;
    double moe_baseline = 0.0;
    double moe_method = 0.0;
    double ratio = 0.0; // width(baseline) / width(method)
    std::optional<double> n_iid_baseline;
    std::optional<double> n_iid_method;
    std::optional<double> gain;
    /// Z^2 p(1-p) / (R * MOE) with R = width(method)/width(baseline) and the
    /// baseline MOE, kept only for comparison.
    std::optional<double> literal;
};

struct NiidReport {
    double z = 0.0;
    std::vector<NiidRow> rows;
    std::vector<int> flagged;
    double mean_gain = 0.0;
    double median_gain = 0.0;
};

/// n_iid = Z^2 p(1-p) / MOE^2 for the baseline and the method; the gain is
/// their difference. Only the listed time-points (all when empty) are paired.
NiidReport n_iid_gain(const SummaryTable& baseline, const SummaryTable& method, double alpha,
                      const std::vector<int>& include = {});

double n_iid(double z, double p_hat, double moe);

/// Time-points where survey k is observed.
std::vector<int> observed_times(const SurveyPanel& panel, int k);

} // namespace surveysynth
