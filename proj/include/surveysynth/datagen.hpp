#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "surveysynth/model.hpp"
#include "surveysynth/rng.hpp"

namespace surveysynth {

enum class PriorRegime { standard, narrowed };

std::string_view to_string(PriorRegime regime);
PriorRegime parse_prior_regime(std::string_view text);

struct GenDesign {
    int K = 3;
    int T = 10;
    Count N = 10000;
    /// n_plan[k][t-1]; 0 marks a missing cell.
    std::vector<std::vector<Count>> n_plan;
    std::vector<BiasKind> bias;
    std::vector<std::string> labels;
    PriorRegime prior_regime = PriorRegime::standard;
    std::uint64_t truth_seed = 1;
    bool monotone_walk = false;
    /// Truths use the raw time index for linear bias unless this is set.
    bool center_time = false;

    /// Three surveys, one anchor of size anchor_n and two biased surveys of
    /// size biased_n, all observed at every time-point.
    static GenDesign three_surveys(int T, Count N, Count anchor_n, Count biased_n, BiasKind biased_kind,
                                   PriorRegime regime);

    PriorSpec priors() const;
    /// Model spec whose phi_value reproduces the generating bias.
    ModelSpec model_spec() const;
    void validate() const;
};

/// Truth drawn jointly from the regime's priors.
LatentState draw_parameters(const GenDesign& design, Rng& rng);

struct GeneratedPanel {
    SurveyPanel panel;
    std::vector<Count> positives; // P_t for t = 1..T (index t - 1)
    /// phi[k][t-1] used to generate survey k.
    std::vector<std::vector<double>> phi;
};

/// P_t ~ Binomial(N, inv_logit(theta_t)); Y_kt ~ exact Fisher non-central
/// hypergeometric(P_t, N - P_t, n_kt, phi_kt).
GeneratedPanel generate_panel(const LatentState& truth, const GenDesign& design, Rng& rng);

/// The illustrative three-survey, ten time-point panel (N = 10,000).
SurveyPanel illustrative_panel();

struct DatedRecord {
    std::string survey;
    std::chrono::sys_days date;
    Count y = 0;
    Count n = 0;
    bool operator==(const DatedRecord&) const = default;
};

struct BenchmarkPoint {
    int t = 0;
    double rate = 0.0;
    double margin = 0.05;
    bool operator==(const BenchmarkPoint&) const = default;
};

struct BenchmarkSeries {
    std::vector<BenchmarkPoint> points;
    const BenchmarkPoint* at(int t) const;
    bool operator==(const BenchmarkSeries&) const = default;
};

/// Synthetic stand-in for the vaccine-uptake application: a small weekly-ish
/// anchor poll with gaps, a huge weekly biased survey that sets the date
/// grid, and a large fortnightly biased survey, over 48 benchmark weeks,
/// with a benchmark series covering the first 46.
struct VaccineLikeData {
    std::vector<DatedRecord> records;
    BenchmarkSeries benchmark;
    std::vector<double> true_rate; // per benchmark week
    Count population = 0;
};

inline constexpr const char* kAnchorPoll = "Axios-Ipsos";
inline constexpr const char* kWeeklyBiased = "Delphi-Facebook";
inline constexpr const char* kFortnightBiased = "Household-Pulse";

VaccineLikeData vaccine_like_data(std::uint64_t seed);

/// Hash of a panel's full contents, for dataset-sharing checks.
std::uint64_t panel_hash(const SurveyPanel& panel);

} // namespace surveysynth
