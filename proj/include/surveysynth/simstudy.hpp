#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surveysynth/datagen.hpp"
#include "surveysynth/likelihood.hpp"
#include "surveysynth/model.hpp"

namespace surveysynth {

enum class FitKind { unbiased_only, constant, linear, walk };

std::string_view to_string(FitKind kind);
FitKind parse_fit_kind(std::string_view text);

struct SimStudyConfig {
    Count N = 10'000'000;
    Count anchor_n = 100;
    Count biased_n = 1000;
    PriorRegime regime = PriorRegime::narrowed;
    SamplerSettings sampler;
    int n_reps = 100;
    std::uint64_t seed = 1;

    /// 100 replications with short chains.
    static SimStudyConfig desk();
    /// 2000 replications with 10 long chains; hours of compute.
    static SimStudyConfig full();
};

struct ReplicationRecord {
    BiasKind truth = BiasKind::constant;
    FitKind fit = FitKind::walk;
    int T = 0;
    int rep = 0;
    std::uint64_t panel_hash = 0;
    double truth_rate = 0.0;
    double estimate = 0.0; // posterior median of inv_logit(theta_T)
    double sq_error = 0.0;
    double r_hat = 1.0;    // of theta_T
    bool failed = false;   // sampler error or r_hat above threshold
    std::string note;
};

struct CellResult {
    BiasKind truth = BiasKind::constant;
    FitKind fit = FitKind::walk;
    int T = 0;
    int n_reps = 0;
    int n_used = 0;
    double mse = 0.0;
    std::optional<double> mcse; // undefined for a single replication
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    int failures = 0;
};

/// MSE and MCSE over the non-failed records, in record order.
CellResult aggregate(BiasKind truth, FitKind fit, int T, const std::vector<ReplicationRecord>& records);

/// Design of the three-survey simulation at T time-points.
GenDesign sim_design(BiasKind truth, int T, const SimStudyConfig& config);

/// Model spec used to fit a simulated panel (already subset for
/// unbiased-only fits).
ModelSpec sim_fit_spec(FitKind fit, const SimStudyConfig& config);

/// One replication: draw a truth, generate its panel, fit, score.
/// The dataset depends on (seed, truth, T, rep) only, so every fit kind
/// sees the same panels.
ReplicationRecord run_replication(BiasKind truth, FitKind fit, int T, int rep, const SimStudyConfig& config);

struct CellRun {
    CellResult result;
    std::vector<ReplicationRecord> records;
};

CellRun run_cell(BiasKind truth, FitKind fit, int T, const SimStudyConfig& config, Exec exec = Exec::parallel);

struct GridRun {
    std::vector<CellResult> cells;
    std::vector<ReplicationRecord> records;
};

/// Every truth kind x {unbiased-only, constant, linear, walk} fit per T.
GridRun run_grid(const std::vector<int>& Ts, const SimStudyConfig& config, Exec exec = Exec::parallel);

} // namespace surveysynth
