#include "surveysynth/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "surveysynth/dists.hpp"
#include "surveysynth/likelihood.hpp"

namespace surveysynth {

std::string_view to_string(PriorRegime regime) {
    return regime == PriorRegime::narrowed ? "narrowed" : "default";
}

PriorRegime parse_prior_regime(std::string_view text) {
    if (text == "default" || text == "standard") return PriorRegime::standard;
    if (text == "narrowed") return PriorRegime::narrowed;
    throw std::invalid_argument("unknown prior regime '" + std::string(text) + "'");
}

GenDesign GenDesign::three_surveys(int T, Count N, Count anchor_n, Count biased_n, BiasKind biased_kind,
                                   PriorRegime regime) {
    GenDesign d;
    d.K = 3;
    d.T = T;
    d.N = N;
    d.n_plan = {std::vector<Count>(T, anchor_n), std::vector<Count>(T, biased_n), std::vector<Count>(T, biased_n)};
    d.bias = {BiasKind::known, biased_kind, biased_kind};
    d.labels = {"Survey1", "Survey2", "Survey3"};
    d.prior_regime = regime;
    return d;
}

PriorSpec GenDesign::priors() const {
    return prior_regime == PriorRegime::narrowed ? PriorSpec::narrowed() : PriorSpec{};
}

ModelSpec GenDesign::model_spec() const {
    ModelSpec spec;
    spec.priors = priors();
    for (BiasKind kind : bias) spec.bias.push_back(BiasModelSpec{kind, {}});
    spec.monotone_walk = monotone_walk;
    spec.center_time = center_time;
    return spec;
}

void GenDesign::validate() const {
    if (K < 1 || T < 1 || N < 1) throw std::invalid_argument("design needs K, T, N >= 1");
    if (static_cast<int>(n_plan.size()) != K || static_cast<int>(bias.size()) != K ||
        static_cast<int>(labels.size()) != K)
        throw std::invalid_argument("design arrays must have K entries");
    for (const auto& row : n_plan) {
        if (static_cast<int>(row.size()) != T) throw std::invalid_argument("sample-size plan must have T columns");
        for (Count n : row)
            if (n < 0 || n > N) throw std::invalid_argument("planned sample size outside [0, N]");
    }
    model_spec().validate(K, T);
}

LatentState draw_parameters(const GenDesign& design, Rng& rng) {
    design.validate();
    const PriorSpec pr = design.priors();
    const int T = design.T;
    LatentState s;
    s.theta.resize(T + 1);
    s.theta[0] = pr.nu0 + std::sqrt(pr.Gamma0_sq) * std_normal(rng);
    s.sigma_sq = truncnorm_sample(0.0, pr.eta0_sq, 0.0, kInf, rng);
    const double sd = std::sqrt(s.sigma_sq);
    for (int t = 1; t <= T; ++t) {
        s.theta[t] = design.monotone_walk ? truncnorm_sample(s.theta[t - 1], s.sigma_sq, s.theta[t - 1], kInf, rng)
                                          : s.theta[t - 1] + sd * std_normal(rng);
    }
    const bool any_walk = std::find(design.bias.begin(), design.bias.end(), BiasKind::walk) != design.bias.end();
    if (any_walk) s.pi_sq = truncnorm_sample(0.0, pr.pi_sq_scale, 0.0, kInf, rng);
    s.gamma.resize(design.K);
    for (int k = 0; k < design.K; ++k) {
        auto& g = s.gamma[k];
        switch (design.bias[k]) {
        case BiasKind::known: break;
        case BiasKind::constant: g.push_back(std::sqrt(pr.gamma0_var) * std_normal(rng)); break;
        case BiasKind::linear:
            g.push_back(std::sqrt(pr.gamma0_var) * std_normal(rng));
            g.push_back(std::sqrt(pr.gamma1_var) * std_normal(rng));
            break;
        case BiasKind::walk: {
            const double step = std::sqrt(*s.pi_sq);
            g.push_back(std::sqrt(pr.gamma0_var) * std_normal(rng));
            for (int t = 1; t <= T; ++t) g.push_back(g.back() + step * std_normal(rng));
            break;
        }
        }
    }
    return s;
}

GeneratedPanel generate_panel(const LatentState& truth, const GenDesign& design, Rng& rng) {
    design.validate();
    const ModelSpec spec = design.model_spec();
    if (truth.time_points() != design.T || !check_state(truth, spec).empty())
        throw std::invalid_argument("truth does not match the design");
    GeneratedPanel out;
    out.panel = SurveyPanel(design.N, design.labels, design.T);
    out.phi.assign(design.K, std::vector<double>(design.T));
    for (int t = 1; t <= design.T; ++t) {
        std::binomial_distribution<Count> positives(design.N, inv_logit(truth.theta[t]));
        const Count P = positives(rng);
        out.positives.push_back(P);
        for (int k = 0; k < design.K; ++k) {
            const double phi = phi_value(spec, truth, k, t);
            out.phi[k][t - 1] = phi;
            const Count n = design.n_plan[k][t - 1];
            if (n == 0) continue;
            out.panel.set(k, t, nchg_sample(NchgParams{P, design.N - P, n, phi}, rng), n);
        }
    }
    return out;
}

SurveyPanel illustrative_panel() {
    SurveyPanel p(10000, {"Survey1", "Survey2", "Survey3"}, 10);
    const Count s1[] = {9, 18, 4, 14, 20, 3, 8, 3, 6, 12};
    const Count s2[] = {66, 48, 7, 19, 30, 2, 10, 2, 2, 6};
    const Count s3[] = {207, 293, 102, 208, 345, 117, 185, 145, 174, 441};
    for (int t = 1; t <= 10; ++t) {
        p.set(0, t, s1[t - 1], 100);
        p.set(1, t, s2[t - 1], 1000);
        p.set(2, t, s3[t - 1], 1000);
    }
    return p;
}

const BenchmarkPoint* BenchmarkSeries::at(int t) const {
    for (const auto& p : points)
        if (p.t == t) return &p;
    return nullptr;
}

VaccineLikeData vaccine_like_data(std::uint64_t seed) {
    using namespace std::chrono;
    Rng rng(derive_seed(seed, {0x7ac}));
    constexpr int weeks = 48;
    constexpr int benchmark_weeks = 46;
    const sys_days start = sys_days{year{2021} / January / 9};

    VaccineLikeData data;
    data.population = 255'000'000;
    const Count N = data.population;
    for (int w = 0; w < weeks; ++w)
        data.true_rate.push_back(0.03 + 0.72 / (1.0 + std::exp(-(w - 13.0) / 4.0)));

    const std::set<int> anchor_gaps = {1, 5, 8, 12, 15, 19, 23, 27, 31, 35, 39, 43};
    double gamma_weekly = 0.55;
    double gamma_fortnight = 0.45;
    for (int w = 0; w < weeks; ++w) {
        const sys_days d = start + days{7 * w};
        gamma_weekly += 0.05 * std_normal(rng);
        gamma_fortnight += 0.05 * std_normal(rng);
        std::binomial_distribution<Count> positives(N, data.true_rate[w]);
        const Count P = positives(rng);
        auto draw = [&](Count n, double log_phi) {
            return nchg_sample(NchgParams{P, N - P, n, std::exp(log_phi)}, rng);
        };

        const Count n_weekly = 240000 + static_cast<Count>(uniform01(rng) * 20000);
        data.records.push_back({kWeeklyBiased, d, draw(n_weekly, gamma_weekly), n_weekly});
        if (w % 2 == 0 && w != 2) {
            const Count n = 68000 + static_cast<Count>(uniform01(rng) * 8000);
            data.records.push_back({kFortnightBiased, d + days{2}, draw(n, gamma_fortnight), n});
        }
        if (!anchor_gaps.contains(w)) {
            const Count n = 950 + static_cast<Count>(uniform01(rng) * 100);
            data.records.push_back({kAnchorPoll, d + days{3}, draw(n, 0.0), n});
        }
        if (w < benchmark_weeks) {
            const double bench = std::clamp(data.true_rate[w] + 0.01 * std_normal(rng), 0.001, 0.999);
            data.benchmark.points.push_back({w + 1, bench, 0.05});
        }
    }
    return data;
}

std::uint64_t panel_hash(const SurveyPanel& panel) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(panel.population()));
    mix(static_cast<std::uint64_t>(panel.surveys()));
    mix(static_cast<std::uint64_t>(panel.time_points()));
    for (const auto& label : panel.labels())
        for (char c : label) mix(static_cast<unsigned char>(c));
    for (int k = 0; k < panel.surveys(); ++k)
        for (int t = 1; t <= panel.time_points(); ++t) {
            const Cell& c = panel.cell(k, t);
            mix(c.y ? static_cast<std::uint64_t>(*c.y) : ~0ULL);
            mix(c.n ? static_cast<std::uint64_t>(*c.n) : ~0ULL);
        }
    return h;
}

} // namespace surveysynth
