#include "surveysynth/mcmc.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <exception>
#include <functional>

#include "surveysynth/diagnostics.hpp"
#include "surveysynth/dists.hpp"

namespace surveysynth {

LatentState initial_state(const SurveyPanel& panel, const ModelSpec& spec, Rng& rng) {
    const int T = panel.time_points();
    LatentState s;
    s.theta.assign(T + 1, spec.priors.nu0);

    std::vector<std::optional<double>> pooled(T + 1);
    for (int t = 1; t <= T; ++t) {
        Count y = 0;
        Count n = 0;
        for (int k = 0; k < panel.surveys(); ++k) {
            const Cell& c = panel.cell(k, t);
            if (!spec.is_anchor(k) || !c.observed()) continue;
            y += *c.y;
            n += *c.n;
        }
        if (n > 0) pooled[t] = logit((static_cast<double>(y) + 0.5) / (static_cast<double>(n) + 1.0));
    }
    std::optional<double> first;
    for (int t = 1; t <= T && !first; ++t) first = pooled[t];
    double last = first.value_or(spec.priors.nu0);
    for (int t = 1; t <= T; ++t) {
        if (pooled[t]) last = *pooled[t];
        s.theta[t] = last;
    }
    s.theta[0] = T >= 1 ? s.theta[1] : spec.priors.nu0;
    for (double& th : s.theta) th += 0.05 * std_normal(rng);
    if (spec.monotone_walk)
        for (int t = 1; t <= T; ++t) s.theta[t] = std::max(s.theta[t], s.theta[t - 1]);

    const double q75 = normal_quantile(0.75);
    s.sigma_sq = std::sqrt(spec.priors.eta0_sq) * q75;
    s.gamma.resize(spec.bias.size());
    for (std::size_t k = 0; k < spec.bias.size(); ++k) s.gamma[k].assign(gamma_size(spec.bias[k].kind, T), 0.0);
    if (spec.has_walk_bias()) s.pi_sq = std::sqrt(spec.priors.pi_sq_scale) * q75;
    return s;
}

std::uint64_t chain_seed(const SamplerSettings& settings, int chain) {
    return derive_seed(settings.seed, {static_cast<std::uint64_t>(chain)});
}

namespace {

struct Proposal {
    const char* group;
    double log_scale;
    long window_accepted = 0;
    long window_tried = 0;
    long kept_accepted = 0;
    long kept_tried = 0;
};

struct CellData {
    bool observed = false;
    Count y = 0;
    Count n = 0;
    double log_coef = 0.0;
};

// Fold x into [lo, hi] by reflection; keeps the random-walk proposal symmetric.
double reflect(double x, double lo, double hi) {
    if (std::isinf(lo) && std::isinf(hi)) return x;
    if (std::isinf(hi)) return x < lo ? 2.0 * lo - x : x;
    if (std::isinf(lo)) return x > hi ? 2.0 * hi - x : x;
    const double w = hi - lo;
    if (w <= 0.0) return lo;
    double y = std::fmod(x - lo, 2.0 * w);
    if (y < 0.0) y += 2.0 * w;
    if (y > w) y = 2.0 * w - y;
    return lo + y;
}

class ChainSampler {
public:
    ChainSampler(const SurveyPanel& panel, const ModelSpec& spec, const SamplerSettings& settings,
                 std::uint64_t seed)
        : panel_(panel), spec_(spec), settings_(settings), rng_(seed), K_(panel.surveys()),
          T_(panel.time_points()) {
        cells_.resize(static_cast<std::size_t>(K_) * T_);
        for (int k = 0; k < K_; ++k)
            for (int t = 1; t <= T_; ++t) {
                const Cell& c = panel.cell(k, t);
                if (!c.observed()) continue;
                CellData& d = data(k, t);
                d.observed = true;
                d.y = *c.y;
                d.n = *c.n;
                d.log_coef = log_choose(d.n, d.y);
            }
        for (int k = 0; k < K_; ++k) {
            const BiasKind kind = spec.bias[k].kind;
            if (kind == BiasKind::walk) walk_surveys_.push_back(k);
            if (kind == BiasKind::linear) linear_surveys_.push_back(k);
            if (kind != BiasKind::known) biased_surveys_.push_back(k);
        }
        known_log_phi_.assign(static_cast<std::size_t>(K_) * T_, 0.0);
        for (int k = 0; k < K_; ++k) {
            const auto& b = spec.bias[k];
            if (b.kind == BiasKind::known && !b.fixed_phi.empty())
                for (int t = 1; t <= T_; ++t) known_log_phi_[k * T_ + t - 1] = std::log(b.fixed_phi[t - 1]);
        }
        build_proposals();
    }

    ChainResult run() {
        cur_ = initial_state(panel_, spec_, rng_);
        check_initial();

        ChainResult out;
        const int total = settings_.burn_in + settings_.n_draws;
        int window = 0;
        for (int iter = 1; iter <= total; ++iter) {
            const bool burning = iter <= settings_.burn_in;
            sweep(!burning);
            if (burning && iter % settings_.adapt_window == 0) adapt(++window);
            if (iter == settings_.burn_in) out.scales_after_burn_in = scales();
            if (!burning && (iter - settings_.burn_in) % settings_.thin == 0) {
                assert(check_state(cur_, spec_).empty());
                out.draws.push_back(cur_);
            }
        }
        if (settings_.burn_in == 0) out.scales_after_burn_in = scales();
        out.scales_final = scales();

        std::map<std::string, std::pair<long, long>> counts;
        for (const auto& p : proposals_) {
            auto& c = counts[p.group];
            c.first += p.kept_accepted;
            c.second += p.kept_tried;
        }
        for (const auto& [group, c] : counts)
            if (c.second > 0) out.acceptance[group] = static_cast<double>(c.first) / static_cast<double>(c.second);
        return out;
    }

private:
    CellData& data(int k, int t) { return cells_[static_cast<std::size_t>(k) * T_ + (t - 1)]; }
    const CellData& data(int k, int t) const { return cells_[static_cast<std::size_t>(k) * T_ + (t - 1)]; }

    double log_phi(int k, int t) const {
        const auto& g = cur_.gamma[k];
        switch (spec_.bias[k].kind) {
        case BiasKind::known: return known_log_phi_[k * T_ + t - 1];
        case BiasKind::constant: return g[0];
        case BiasKind::linear: return g[0] + g[1] * bias_time(spec_, t, T_);
        case BiasKind::walk: return g[t];
        }
        return 0.0;
    }

    double cell_ll(int k, int t) const {
        const CellData& d = data(k, t);
        if (!d.observed) return 0.0;
        if (!spec_.use_exact_nchg) return binomial_logit_logpmf(d.y, d.n, cur_.theta[t] + log_phi(k, t), d.log_coef);
        return cell_log_lik(d.y, d.n, panel_.population(), cur_.theta[t], log_phi(k, t), true);
    }

    double cells_at(int t) const {
        double s = 0.0;
        for (int k = 0; k < K_; ++k) s += cell_ll(k, t);
        return s;
    }

    double cells_of(int k) const {
        double s = 0.0;
        for (int t = 1; t <= T_; ++t) s += cell_ll(k, t);
        return s;
    }

    double theta_inc(int t) const {
        return theta_increment_logpdf(cur_.theta[t - 1], cur_.theta[t], cur_.sigma_sq, spec_.monotone_walk);
    }

    double gamma_inc(int k, int j) const {
        const auto& g = cur_.gamma[k];
        return normal_logpdf(g[j], g[j - 1], *cur_.pi_sq);
    }

    double theta_terms(int t) const {
        double s = t == 0 ? normal_logpdf(cur_.theta[0], spec_.priors.nu0, spec_.priors.Gamma0_sq) : theta_inc(t);
        if (t < T_) s += theta_inc(t + 1);
        if (t >= 1) s += cells_at(t);
        return s;
    }

    double sigma_terms() const {
        double s = log_prior_sigma(cur_, spec_);
        for (int t = 1; t <= T_; ++t) s += theta_inc(t);
        return s;
    }

    double gamma_terms(int k, int j) const {
        const PriorSpec& pr = spec_.priors;
        const auto& g = cur_.gamma[k];
        switch (spec_.bias[k].kind) {
        case BiasKind::known: return 0.0;
        case BiasKind::constant: return normal_logpdf(g[0], 0.0, pr.gamma0_var) + cells_of(k);
        case BiasKind::linear:
            return (j == 0 ? normal_logpdf(g[0], 0.0, pr.gamma0_var) : normal_logpdf(g[1], 0.0, pr.gamma1_var)) +
                   cells_of(k);
        case BiasKind::walk: {
            double s = j == 0 ? normal_logpdf(g[0], 0.0, pr.gamma0_var) : gamma_inc(k, j);
            if (j < T_) s += gamma_inc(k, j + 1);
            if (j >= 1) s += cell_ll(k, j);
            return s;
        }
        }
        return 0.0;
    }

    double pi_terms() const {
        double s = log_prior_pi(cur_, spec_);
        for (int k : walk_surveys_)
            for (int j = 1; j <= T_; ++j) s += gamma_inc(k, j);
        return s;
    }

    double local_shift_terms(int t) const {
        double s = theta_inc(t);
        if (t < T_) s += theta_inc(t + 1);
        for (int k : walk_surveys_) {
            s += gamma_inc(k, t);
            if (t < T_) s += gamma_inc(k, t + 1);
        }
        return s + cells_at(t);
    }

    double full_terms() const {
        double s = log_prior(cur_, spec_);
        for (int k = 0; k < K_; ++k) s += cells_of(k);
        return s;
    }

    // Metropolis step: `terms` evaluates every log-density term touched by
    // `apply`, which returns the log Jacobian; `revert` restores the exact
    // previous values on rejection.
    template <class Terms, class Apply, class Revert>
    void metropolis(Proposal& prop, bool keep, Terms&& terms, Apply&& apply, Revert&& revert) {
        const double before = terms();
        const double log_jacobian = apply(std::exp(prop.log_scale));
        const double after = terms();
        const double log_alpha = after - before + log_jacobian;
        const bool accept = std::isfinite(after) && std::log(uniform01(rng_)) < log_alpha;
        if (!accept) revert();
        ++prop.window_tried;
        if (accept) ++prop.window_accepted;
        if (keep) {
            ++prop.kept_tried;
            if (accept) ++prop.kept_accepted;
        }
    }

    void scalar_update(Proposal& prop, bool keep, double& value, const std::function<double()>& terms,
                       double lo = -kInf, double hi = kInf) {
        const double old = value;
        metropolis(
            prop, keep, terms,
            [&](double scale) {
                value = reflect(value + scale * std_normal(rng_), lo, hi);
                return 0.0;
            },
            [&] { value = old; });
    }

    void log_scale_update(Proposal& prop, bool keep, double& value, const std::function<double()>& terms) {
        const double old = value;
        metropolis(
            prop, keep, terms,
            [&](double scale) {
                const double step = scale * std_normal(rng_);
                value *= std::exp(step);
                return step;
            },
            [&] { value = old; });
    }

    void sweep(bool keep) {
        std::size_t p = 0;
        for (int t = 0; t <= T_; ++t) {
            const double lo = (spec_.monotone_walk && t > 0) ? cur_.theta[t - 1] : -kInf;
            const double hi = (spec_.monotone_walk && t < T_) ? cur_.theta[t + 1] : kInf;
            scalar_update(proposals_[p++], keep, cur_.theta[t], [&] { return theta_terms(t); }, lo, hi);
        }
        log_scale_update(proposals_[p++], keep, cur_.sigma_sq, [&] { return sigma_terms(); });
        for (int k = 0; k < K_; ++k) {
            const int size = static_cast<int>(cur_.gamma[k].size());
            for (int j = 0; j < size; ++j)
                scalar_update(proposals_[p++], keep, cur_.gamma[k][j], [&] { return gamma_terms(k, j); });
        }
        if (!walk_surveys_.empty()) {
            log_scale_update(proposals_[p++], keep, *cur_.pi_sq, [&] { return pi_terms(); });
            for (int t = 1; t <= T_; ++t) {
                const double old_theta = cur_.theta[t];
                old_gamma_.clear();
                for (int k : walk_surveys_) old_gamma_.push_back(cur_.gamma[k][t]);
                metropolis(
                    proposals_[p++], keep, [&] { return local_shift_terms(t); },
                    [&](double scale) {
                        const double d = scale * std_normal(rng_);
                        cur_.theta[t] += d;
                        for (int k : walk_surveys_) cur_.gamma[k][t] -= d;
                        return 0.0;
                    },
                    [&] {
                        cur_.theta[t] = old_theta;
                        for (std::size_t i = 0; i < walk_surveys_.size(); ++i)
                            cur_.gamma[walk_surveys_[i]][t] = old_gamma_[i];
                    });
            }
        }
        auto save = [&] { saved_ = cur_; };
        auto restore = [&] { cur_ = saved_; };
        if (!biased_surveys_.empty()) {
            save();
            metropolis(
                proposals_[p++], keep, [&] { return full_terms(); },
                [&](double scale) {
                    const double d = scale * std_normal(rng_);
                    for (double& th : cur_.theta) th += d;
                    for (int k : biased_surveys_) {
                        auto& g = cur_.gamma[k];
                        if (spec_.bias[k].kind == BiasKind::linear)
                            g[0] -= d;
                        else
                            for (double& v : g) v -= d;
                    }
                    return 0.0;
                },
                restore);
        }
        if (!linear_surveys_.empty()) {
            save();
            metropolis(
                proposals_[p++], keep, [&] { return full_terms(); },
                [&](double scale) {
                    const double d = scale * std_normal(rng_);
                    for (int t = 0; t <= T_; ++t) cur_.theta[t] += d * bias_time(spec_, t, T_);
                    for (int k : linear_surveys_) cur_.gamma[k][1] -= d;
                    return 0.0;
                },
                restore);
        }
    }

    void build_proposals() {
        const double theta0 = std::log(0.1);
        for (int t = 0; t <= T_; ++t) proposals_.push_back({"theta", theta0});
        proposals_.push_back({"sigma_sq", std::log(0.5)});
        for (int k = 0; k < K_; ++k)
            for (int j = 0; j < gamma_size(spec_.bias[k].kind, T_); ++j) proposals_.push_back({"gamma", std::log(0.1)});
        if (!walk_surveys_.empty()) {
            proposals_.push_back({"pi_sq", std::log(0.5)});
            for (int t = 1; t <= T_; ++t) proposals_.push_back({"shift", std::log(0.1)});
        }
        if (!biased_surveys_.empty()) proposals_.push_back({"shift", std::log(0.1)});
        if (!linear_surveys_.empty()) proposals_.push_back({"shift", std::log(0.01)});
    }

    // Robbins-Monro step on each log scale toward the target rate.
    void adapt(int window) {
        const double step = std::min(1.0, 2.0 / std::sqrt(static_cast<double>(window)));
        for (auto& p : proposals_) {
            if (p.window_tried == 0) continue;
            const double rate = static_cast<double>(p.window_accepted) / static_cast<double>(p.window_tried);
            p.log_scale = std::clamp(p.log_scale + step * (rate - settings_.target_accept), -25.0, 5.0);
            p.window_accepted = 0;
            p.window_tried = 0;
        }
    }

    std::vector<double> scales() const {
        std::vector<double> out;
        out.reserve(proposals_.size());
        for (const auto& p : proposals_) out.push_back(p.log_scale);
        return out;
    }

    void check_initial() const {
        const LogDensityReport r = log_posterior(cur_, panel_, spec_);
        if (std::isfinite(r.log_post)) return;
        for (const auto& [block, value] : r.per_block)
            if (!std::isfinite(value))
                throw SamplerError("initialization: non-finite log density in block '" + block + "'");
        throw SamplerError("initialization: non-finite log posterior");
    }

    const SurveyPanel& panel_;
    const ModelSpec& spec_;
    const SamplerSettings& settings_;
    Rng rng_;
    int K_;
    int T_;
    std::vector<CellData> cells_;
    std::vector<double> known_log_phi_;
    std::vector<int> walk_surveys_;
    std::vector<int> linear_surveys_;
    std::vector<int> biased_surveys_;
    std::vector<Proposal> proposals_;
    LatentState cur_;
    LatentState saved_;
    std::vector<double> old_gamma_;
};

void check_inputs(const SurveyPanel& panel, const ModelSpec& spec, const SamplerSettings& settings) {
    settings.validate();
    const auto violations = validate_panel(panel);
    if (!violations.empty()) throw std::invalid_argument("invalid panel: " + violations.front().rule);
    spec.validate(panel.surveys(), panel.time_points());
}

} // namespace

ChainResult run_chain(const SurveyPanel& panel, const ModelSpec& spec, const SamplerSettings& settings,
                      std::uint64_t seed) {
    check_inputs(panel, spec, settings);
    ChainSampler sampler(panel, spec, settings, seed);
    return sampler.run();
}

ChainRun run_chains(const SurveyPanel& panel, const ModelSpec& spec, const SamplerSettings& settings, Exec exec) {
    check_inputs(panel, spec, settings);
    const int n = settings.n_chains;
    std::vector<ChainResult> results(n);
    std::vector<std::exception_ptr> errors(n);
    auto body = [&](int c) {
        try {
            ChainSampler sampler(panel, spec, settings, chain_seed(settings, c));
            results[c] = sampler.run();
        } catch (...) {
            errors[c] = std::current_exception();
        }
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (int c = 0; c < n; ++c) body(c);
    } else {
        for (int c = 0; c < n; ++c) body(c);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    ChainRun run;
    run.draws.settings = settings;
    for (auto& r : results) run.draws.draws.push_back(r.draws);
    std::map<std::string, double> acc;
    for (const auto& r : results)
        for (const auto& [group, rate] : r.acceptance) acc[group] += rate / static_cast<double>(n);
    run.draws.acceptance_rates = std::move(acc);
    run.chains = std::move(results);
    run.diagnostics = diagnose(run.draws);
    return run;
}

std::map<std::string, std::vector<std::vector<double>>> scalar_traces(const ChainDraws& draws) {
    std::map<std::string, std::vector<std::vector<double>>> out;
    const std::size_t n_chains = draws.draws.size();
    auto series = [&](const std::string& key) -> std::vector<std::vector<double>>& {
        auto& s = out[key];
        if (s.empty()) s.resize(n_chains);
        return s;
    };
    for (std::size_t c = 0; c < n_chains; ++c) {
        for (const LatentState& st : draws.draws[c]) {
            for (std::size_t t = 0; t < st.theta.size(); ++t)
                series("theta[" + std::to_string(t) + "]")[c].push_back(st.theta[t]);
            series("sigma_sq")[c].push_back(st.sigma_sq);
            if (st.pi_sq) series("pi_sq")[c].push_back(*st.pi_sq);
            for (std::size_t k = 0; k < st.gamma.size(); ++k)
                for (std::size_t j = 0; j < st.gamma[k].size(); ++j)
                    series("gamma[" + std::to_string(k) + "][" + std::to_string(j) + "]")[c].push_back(st.gamma[k][j]);
        }
    }
    return out;
}

Diagnostics diagnose(const ChainDraws& draws) {
    Diagnostics d;
    if (draws.draws_per_chain() < 4) return d;
    for (const auto& [key, chains] : scalar_traces(draws)) {
        const double rh = r_hat(chains);
        d.r_hat[key] = rh;
        d.ess[key] = effective_sample_size(chains);
        if (!(rh <= kRhatThreshold)) d.converged = false;
    }
    return d;
}

namespace {

SummaryRow summarize_series(std::vector<std::vector<double>> chains, double alpha, std::string parameter,
                            std::string survey, int t) {
    SummaryRow row;
    row.parameter = std::move(parameter);
    row.survey = std::move(survey);
    row.t = t;
    std::vector<double> pooled;
    for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
    std::sort(pooled.begin(), pooled.end());
    row.median = quantile_sorted(pooled, 0.5);
    row.lower = quantile_sorted(pooled, alpha / 2.0);
    row.upper = quantile_sorted(pooled, 1.0 - alpha / 2.0);
    if (!chains.empty() && chains.front().size() >= 4) {
        row.r_hat = r_hat(chains);
        row.ess = effective_sample_size(chains);
    } else {
        row.r_hat = std::numeric_limits<double>::quiet_NaN();
        row.ess = static_cast<double>(pooled.size());
    }
    return row;
}

} // namespace

SummaryTable summarize(const ChainDraws& draws, const ModelSpec& spec, double alpha, Transform transform) {
    if (draws.draws_per_chain() == 0) throw std::invalid_argument("summarize: no draws");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("summarize: alpha outside (0,1)");
    SummaryTable table;
    table.alpha = alpha;
    const int T = draws.draws.front().front().time_points();

    auto collect = [&](auto&& fn) {
        std::vector<std::vector<double>> chains(draws.draws.size());
        for (std::size_t c = 0; c < draws.draws.size(); ++c)
            for (const LatentState& st : draws.draws[c]) chains[c].push_back(fn(st));
        return chains;
    };

    const bool rate = transform == Transform::rate;
    for (int t = 1; t <= T; ++t)
        table.rates.push_back(summarize_series(
            collect([&](const LatentState& s) { return rate ? inv_logit(s.theta[t]) : s.theta[t]; }), alpha,
            rate ? "rate" : "theta", "", t));

    table.parameters.push_back(
        summarize_series(collect([](const LatentState& s) { return s.sigma_sq; }), alpha, "sigma_sq", "", 0));
    if (spec.has_walk_bias())
        table.parameters.push_back(
            summarize_series(collect([](const LatentState& s) { return *s.pi_sq; }), alpha, "pi_sq", "", 0));
    for (std::size_t k = 0; k < spec.bias.size(); ++k) {
        const BiasKind kind = spec.bias[k].kind;
        if (kind == BiasKind::known) continue;
        const std::string survey = std::to_string(k);
        if (kind == BiasKind::constant)
            table.parameters.push_back(summarize_series(
                collect([&](const LatentState& s) { return s.gamma[k][0]; }), alpha, "gamma", survey, 0));
        if (kind == BiasKind::linear) {
            table.parameters.push_back(summarize_series(
                collect([&](const LatentState& s) { return s.gamma[k][0]; }), alpha, "gamma0", survey, 0));
            table.parameters.push_back(summarize_series(
                collect([&](const LatentState& s) { return s.gamma[k][1]; }), alpha, "gamma1", survey, 0));
        }
        for (int t = 1; t <= T; ++t)
            table.parameters.push_back(summarize_series(
                collect([&](const LatentState& s) { return phi_value(spec, s, static_cast<int>(k), t); }), alpha,
                "phi", survey, t));
    }
    table.converged = true;
    for (const auto& r : table.rates)
        if (!(r.r_hat <= kRhatThreshold)) table.converged = false;
    for (const auto& r : table.parameters)
        if (!(r.r_hat <= kRhatThreshold)) table.converged = false;
    return table;
}

} // namespace surveysynth
