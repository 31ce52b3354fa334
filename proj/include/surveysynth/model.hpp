#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace surveysynth {

using Count = std::int64_t;

/// One survey wave. Both fields are present (observed) or both absent
/// (missing); anything else is a validation error.
struct Cell {
    std::optional<Count> y;
    std::optional<Count> n;

    bool observed() const { return y.has_value() && n.has_value(); }
    bool operator==(const Cell&) const = default;
};

/// K surveys by T time-points of (yes, respondents) counts drawn from a
/// population of N persons. Time-points are 1-based: t = 1..T.
class SurveyPanel {
public:
    SurveyPanel() = default;
    SurveyPanel(Count population, std::vector<std::string> labels, int time_points);

    int surveys() const { return static_cast<int>(labels_.size()); }
    int time_points() const { return time_points_; }
    Count population() const { return population_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(int k) const { return labels_.at(k); }

    /// Index of the survey with this label, or -1.
    int survey_index(std::string_view label) const;

    const Cell& cell(int k, int t) const { return cells_.at(index(k, t)); }
    Cell& cell(int k, int t) { return cells_.at(index(k, t)); }
    void set(int k, int t, Count y, Count n) { cell(k, t) = Cell{y, n}; }

    std::size_t observed_count() const;

    /// Panel restricted to time-points 1..t_max.
    SurveyPanel truncated(int t_max) const;
    /// Panel restricted to the listed surveys (in that order).
    SurveyPanel subset(const std::vector<int>& surveys) const;

    bool operator==(const SurveyPanel&) const = default;

private:
    std::size_t index(int k, int t) const;

    Count population_ = 0;
    std::vector<std::string> labels_;
    int time_points_ = 0;
    std::vector<Cell> cells_;
};

enum class BiasKind { known, constant, linear, walk };

std::string_view to_string(BiasKind kind);
BiasKind parse_bias_kind(std::string_view text);

struct BiasModelSpec {
    BiasKind kind = BiasKind::known;
    /// Only meaningful for kind == known; empty means phi = 1 at every t.
    /// Otherwise indexed by t - 1.
    std::vector<double> fixed_phi;

    bool operator==(const BiasModelSpec&) const = default;
};

/// Every normal here is parameterised by (mean, variance).
struct PriorSpec {
    double eta0_sq = 1.0;     // half-normal variance for sigma^2
    double nu0 = 0.0;         // prior mean of theta_0
    double Gamma0_sq = 2.0;   // prior variance of theta_0
    double gamma0_var = 1.0;  // gamma_k, gamma_k0
    double gamma1_var = 0.25; // linear slope gamma_k1
    double pi_sq_scale = 1.0; // half-normal variance for pi^2

    /// Narrowed priors used to generate plausible simulation truths.
    static PriorSpec narrowed();

    void validate() const;
    bool operator==(const PriorSpec&) const = default;
};

struct ModelSpec {
    PriorSpec priors;
    std::vector<BiasModelSpec> bias;
    bool monotone_walk = false;
    bool center_time = true;
    bool use_exact_nchg = false;

    bool has_walk_bias() const;
    bool is_anchor(int k) const { return bias.at(k).kind == BiasKind::known; }

    /// Throws std::invalid_argument unless the spec is usable with a
    /// panel of `surveys` x `time_points`.
    void validate(int surveys, int time_points) const;

    bool operator==(const ModelSpec&) const = default;
};

/// Number of gamma entries a survey carries for a given bias kind.
int gamma_size(BiasKind kind, int time_points);

/// One full parameter configuration. theta has T + 1 entries (theta_0 is
/// the pre-data state); gamma[k] is shaped by the survey's bias kind.
struct LatentState {
    std::vector<double> theta;
    double sigma_sq = 1.0;
    std::vector<std::vector<double>> gamma;
    std::optional<double> pi_sq;

    int time_points() const { return static_cast<int>(theta.size()) - 1; }
    bool operator==(const LatentState&) const = default;
};

/// Invariant violations of `state` under `spec`; empty when valid.
std::vector<std::string> check_state(const LatentState& state, const ModelSpec& spec);

struct SamplerSettings {
    int n_chains = 10;
    int burn_in = 20000;
    int n_draws = 50000;
    int thin = 5;
    std::uint64_t seed = 1;
    double target_accept = 0.44;
    int adapt_window = 50;

    static SamplerSettings full() { return {}; }
    static SamplerSettings desk();

    void validate() const;
    bool operator==(const SamplerSettings&) const = default;
};

struct ChainDraws {
    /// draws[c][i]: retained state i of chain c.
    std::vector<std::vector<LatentState>> draws;
    SamplerSettings settings;
    std::map<std::string, double> acceptance_rates;

    std::size_t draws_per_chain() const { return draws.empty() ? 0 : draws.front().size(); }
};

struct SummaryRow {
    std::string parameter; // rate, theta0, sigma_sq, pi_sq, gamma, phi
    std::string survey;    // empty unless survey-specific
    int t = 0;             // time index, 0 when not time-specific
    double median = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double r_hat = 1.0;
    double ess = 0.0;

    double width() const { return upper - lower; }
    bool operator==(const SummaryRow&) const = default;
};

struct SummaryTable {
    double alpha = 0.05;
    std::vector<SummaryRow> rates;      // one per t = 1..T
    std::vector<SummaryRow> parameters; // everything else
    bool converged = true;

    const SummaryRow* rate_at(int t) const;
    const SummaryRow* find(std::string_view parameter, std::string_view survey = {},
                           int t = 0) const;
    bool operator==(const SummaryTable&) const = default;
};

struct Violation {
    int k = 0;
    int t = 0;
    std::string rule;
    bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_panel(const SurveyPanel& panel);

/// Biased-survey cells with y = 0 or y = n, where phi is only weakly
/// identified. Result pairs are (k, t).
std::vector<std::pair<int, int>> detect_saturated_cells(const SurveyPanel& panel,
                                                        const ModelSpec& spec);

} // namespace surveysynth
