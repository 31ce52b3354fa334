#include "surveysynth/model.hpp"

#include <cmath>
#include <set>

namespace surveysynth {

SurveyPanel::SurveyPanel(Count population, std::vector<std::string> labels, int time_points)
    : population_(population), labels_(std::move(labels)), time_points_(time_points) {
    if (time_points_ < 0) throw std::invalid_argument("negative time-point count");
    cells_.resize(labels_.size() * static_cast<std::size_t>(time_points_));
}

std::size_t SurveyPanel::index(int k, int t) const {
    if (k < 0 || k >= surveys() || t < 1 || t > time_points_)
        throw std::out_of_range("panel cell (" + std::to_string(k) + "," + std::to_string(t) +
                                ") out of range");
    return static_cast<std::size_t>(k) * time_points_ + (t - 1);
}

int SurveyPanel::survey_index(std::string_view label) const {
    for (int k = 0; k < surveys(); ++k)
        if (labels_[k] == label) return k;
    return -1;
}

std::size_t SurveyPanel::observed_count() const {
    std::size_t count = 0;
    for (const auto& c : cells_) count += c.observed() ? 1 : 0;
    return count;
}

SurveyPanel SurveyPanel::truncated(int t_max) const {
    if (t_max < 1 || t_max > time_points_) throw std::out_of_range("truncation point out of range");
    SurveyPanel out(population_, labels_, t_max);
    for (int k = 0; k < surveys(); ++k)
        for (int t = 1; t <= t_max; ++t) out.cell(k, t) = cell(k, t);
    return out;
}

SurveyPanel SurveyPanel::subset(const std::vector<int>& surveys) const {
    std::vector<std::string> labels;
    for (int k : surveys) labels.push_back(label(k));
    SurveyPanel out(population_, std::move(labels), time_points_);
    for (std::size_t i = 0; i < surveys.size(); ++i)
        for (int t = 1; t <= time_points_; ++t) out.cell(static_cast<int>(i), t) = cell(surveys[i], t);
    return out;
}

std::string_view to_string(BiasKind kind) {
    switch (kind) {
    case BiasKind::known: return "known";
    case BiasKind::constant: return "constant";
    case BiasKind::linear: return "linear";
    case BiasKind::walk: return "walk";
    }
    return "?";
}

BiasKind parse_bias_kind(std::string_view text) {
    if (text == "known") return BiasKind::known;
    if (text == "constant") return BiasKind::constant;
    if (text == "linear") return BiasKind::linear;
    if (text == "walk") return BiasKind::walk;
    throw std::invalid_argument("unknown bias kind '" + std::string(text) + "'");
}

PriorSpec PriorSpec::narrowed() {
    PriorSpec p;
    p.Gamma0_sq = 1.0;
    p.eta0_sq = 0.1;
    p.gamma1_var = 0.01;
    p.pi_sq_scale = 0.01;
    return p;
}

void PriorSpec::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string("prior variance ") + name + " must be positive");
    };
    positive(eta0_sq, "eta0_sq");
    positive(Gamma0_sq, "Gamma0_sq");
    positive(gamma0_var, "gamma0_var");
    positive(gamma1_var, "gamma1_var");
    positive(pi_sq_scale, "pi_sq_scale");
    if (!std::isfinite(nu0)) throw std::invalid_argument("prior mean nu0 must be finite");
}

bool ModelSpec::has_walk_bias() const {
    for (const auto& b : bias)
        if (b.kind == BiasKind::walk) return true;
    return false;
}

void ModelSpec::validate(int surveys, int time_points) const {
    priors.validate();
    if (static_cast<int>(bias.size()) != surveys)
        throw std::invalid_argument("model has " + std::to_string(bias.size()) +
                                    " bias specs for " + std::to_string(surveys) + " surveys");
    bool any_known = false;
    for (const auto& b : bias) {
        if (b.kind != BiasKind::known) continue;
        any_known = true;
        if (b.fixed_phi.empty()) continue;
        if (static_cast<int>(b.fixed_phi.size()) != time_points)
            throw std::invalid_argument("fixed_phi length does not match time-points");
        for (double phi : b.fixed_phi)
            if (!(phi > 0.0) || !std::isfinite(phi))
                throw std::invalid_argument("fixed_phi entries must be positive");
    }
    if (!any_known) throw std::invalid_argument("at least one survey must be an anchor (kind=known)");
}

int gamma_size(BiasKind kind, int time_points) {
    switch (kind) {
    case BiasKind::known: return 0;
    case BiasKind::constant: return 1;
    case BiasKind::linear: return 2;
    case BiasKind::walk: return time_points + 1;
    }
    return 0;
}

std::vector<std::string> check_state(const LatentState& state, const ModelSpec& spec) {
    std::vector<std::string> out;
    const int T = state.time_points();
    if (T < 0) {
        out.push_back("theta is empty");
        return out;
    }
    for (double th : state.theta)
        if (!std::isfinite(th)) out.push_back("non-finite theta");
    if (!(state.sigma_sq > 0.0) || !std::isfinite(state.sigma_sq)) out.push_back("sigma_sq not positive");
    if (spec.monotone_walk)
        for (int t = 1; t <= T; ++t)
            if (state.theta[t] < state.theta[t - 1])
                out.push_back("monotone walk violated at t=" + std::to_string(t));
    if (state.gamma.size() != spec.bias.size()) {
        out.push_back("gamma block count mismatch");
        return out;
    }
    for (std::size_t k = 0; k < spec.bias.size(); ++k) {
        const auto& g = state.gamma[k];
        if (static_cast<int>(g.size()) != gamma_size(spec.bias[k].kind, T))
            out.push_back("gamma shape mismatch for survey " + std::to_string(k));
        for (double v : g)
            if (!std::isfinite(v)) out.push_back("non-finite gamma for survey " + std::to_string(k));
    }
    if (spec.has_walk_bias()) {
        if (!state.pi_sq || !(*state.pi_sq > 0.0) || !std::isfinite(*state.pi_sq))
            out.push_back("pi_sq missing or not positive");
    } else if (state.pi_sq) {
        out.push_back("pi_sq present without a walk survey");
    }
    return out;
}

SamplerSettings SamplerSettings::desk() {
    SamplerSettings s;
    s.n_chains = 4;
    s.burn_in = 5000;
    s.n_draws = 10000;
    s.thin = 5;
    return s;
}

void SamplerSettings::validate() const {
    if (n_chains < 1) throw std::invalid_argument("n_chains must be >= 1");
    if (thin < 1) throw std::invalid_argument("thin must be >= 1");
    if (burn_in < 0) throw std::invalid_argument("burn_in must be >= 0");
    if (n_draws < thin) throw std::invalid_argument("n_draws must be >= thin");
    if (!(target_accept > 0.0 && target_accept < 1.0))
        throw std::invalid_argument("target_accept must lie in (0,1)");
    if (adapt_window < 1) throw std::invalid_argument("adapt_window must be >= 1");
}

const SummaryRow* SummaryTable::rate_at(int t) const {
    for (const auto& r : rates)
        if (r.t == t) return &r;
    return nullptr;
}

const SummaryRow* SummaryTable::find(std::string_view parameter, std::string_view survey, int t) const {
    if (parameter == "rate") return rate_at(t);
    for (const auto& r : parameters)
        if (r.parameter == parameter && r.survey == survey && r.t == t) return &r;
    return nullptr;
}

std::vector<Violation> validate_panel(const SurveyPanel& panel) {
    std::vector<Violation> out;
    if (panel.surveys() < 1) out.push_back({-1, 0, "panel has no surveys"});
    if (panel.time_points() < 1) out.push_back({-1, 0, "panel has no time-points"});
    if (panel.population() < 1) out.push_back({-1, 0, "population size must be positive"});
    std::set<std::string> seen;
    for (int k = 0; k < panel.surveys(); ++k)
        if (!seen.insert(panel.label(k)).second) out.push_back({k, 0, "duplicate survey label"});

    auto at = [](int k, int t) { return " at (" + std::to_string(k) + "," + std::to_string(t) + ")"; };
    for (int k = 0; k < panel.surveys(); ++k) {
        for (int t = 1; t <= panel.time_points(); ++t) {
            const Cell& c = panel.cell(k, t);
            if (c.y.has_value() != c.n.has_value()) {
                out.push_back({k, t, "half-missing cell" + at(k, t)});
                continue;
            }
            if (!c.observed()) continue;
            if (*c.y < 0) out.push_back({k, t, "negative y" + at(k, t)});
            if (*c.n < 1) out.push_back({k, t, "n not positive" + at(k, t)});
            if (*c.y > *c.n) out.push_back({k, t, "y exceeds n" + at(k, t)});
            if (*c.n > panel.population()) out.push_back({k, t, "n exceeds N" + at(k, t)});
        }
    }
    return out;
}

std::vector<std::pair<int, int>> detect_saturated_cells(const SurveyPanel& panel, const ModelSpec& spec) {
    std::vector<std::pair<int, int>> out;
    for (int k = 0; k < panel.surveys(); ++k) {
        if (spec.bias.at(k).kind == BiasKind::known) continue;
        for (int t = 1; t <= panel.time_points(); ++t) {
            const Cell& c = panel.cell(k, t);
            if (c.observed() && (*c.y == 0 || *c.y == *c.n)) out.emplace_back(k, t);
        }
    }
    return out;
}

} // namespace surveysynth
