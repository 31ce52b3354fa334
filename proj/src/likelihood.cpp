#include "surveysynth/likelihood.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "surveysynth/dists.hpp"

namespace surveysynth {

double bias_time(const ModelSpec& spec, int t, int time_points) {
    return spec.center_time ? static_cast<double>(t) - 0.5 * static_cast<double>(time_points)
                            : static_cast<double>(t);
}

double log_phi_value(const ModelSpec& spec, const LatentState& state, int k, int t) {
    const BiasModelSpec& b = spec.bias.at(k);
    const int T = state.time_points();
    const auto& g = state.gamma.at(k);
    if (static_cast<int>(g.size()) != gamma_size(b.kind, T))
        throw std::invalid_argument("gamma shape does not match bias kind for survey " + std::to_string(k));
    switch (b.kind) {
    case BiasKind::known: return b.fixed_phi.empty() ? 0.0 : std::log(b.fixed_phi.at(t - 1));
    case BiasKind::constant: return g[0];
    case BiasKind::linear: return g[0] + g[1] * bias_time(spec, t, T);
    case BiasKind::walk: return g.at(t);
    }
    return 0.0;
}

double phi_value(const ModelSpec& spec, const LatentState& state, int k, int t) {
    return std::exp(log_phi_value(spec, state, k, t));
}

double theta_increment_logpdf(double prev, double next, double sigma_sq, bool monotone) {
    if (monotone) return truncnorm_logpdf(next, prev, sigma_sq, prev, kInf);
    return normal_logpdf(next, prev, sigma_sq);
}

double log_prior_theta(const LatentState& state, const ModelSpec& spec) {
    if (!(state.sigma_sq > 0.0)) return -kInf;
    double lp = normal_logpdf(state.theta[0], spec.priors.nu0, spec.priors.Gamma0_sq);
    for (std::size_t t = 1; t < state.theta.size(); ++t)
        lp += theta_increment_logpdf(state.theta[t - 1], state.theta[t], state.sigma_sq, spec.monotone_walk);
    return lp;
}

double log_prior_sigma(const LatentState& state, const ModelSpec& spec) {
    if (!(state.sigma_sq > 0.0)) return -kInf;
    return truncnorm_logpdf(state.sigma_sq, 0.0, spec.priors.eta0_sq, 0.0, kInf);
}

double log_prior_gamma(const LatentState& state, const ModelSpec& spec) {
    const PriorSpec& pr = spec.priors;
    double lp = 0.0;
    for (std::size_t k = 0; k < spec.bias.size(); ++k) {
        const auto& g = state.gamma.at(k);
        switch (spec.bias[k].kind) {
        case BiasKind::known: break;
        case BiasKind::constant: lp += normal_logpdf(g.at(0), 0.0, pr.gamma0_var); break;
        case BiasKind::linear:
            lp += normal_logpdf(g.at(0), 0.0, pr.gamma0_var);
            lp += normal_logpdf(g.at(1), 0.0, pr.gamma1_var);
            break;
        case BiasKind::walk: {
            if (!state.pi_sq || !(*state.pi_sq > 0.0)) return -kInf;
            lp += normal_logpdf(g.at(0), 0.0, pr.gamma0_var);
            for (std::size_t j = 1; j < g.size(); ++j) lp += normal_logpdf(g[j], g[j - 1], *state.pi_sq);
            break;
        }
        }
    }
    return lp;
}

double log_prior_pi(const LatentState& state, const ModelSpec& spec) {
    if (!spec.has_walk_bias()) return 0.0;
    if (!state.pi_sq || !(*state.pi_sq > 0.0)) return -kInf;
    return truncnorm_logpdf(*state.pi_sq, 0.0, spec.priors.pi_sq_scale, 0.0, kInf);
}

double log_prior(const LatentState& state, const ModelSpec& spec) {
    double lp = log_prior_theta(state, spec);
    lp += log_prior_sigma(state, spec);
    lp += log_prior_gamma(state, spec);
    lp += log_prior_pi(state, spec);
    return lp;
}

double cell_log_lik(Count y, Count n, Count population, double theta, double log_phi, bool exact_nchg) {
    if (!exact_nchg) return binomial_logit_logpmf(y, n, theta + log_phi, log_choose(n, y));
    const auto m1 = static_cast<Count>(std::llround(inv_logit(theta) * static_cast<double>(population)));
    return nchg_logpmf(y, NchgParams{m1, population - m1, n, std::exp(log_phi)});
}

void cell_log_lik_terms(const LatentState& state, const SurveyPanel& panel, const ModelSpec& spec,
                        std::span<double> out, Exec exec) {
    const int K = panel.surveys();
    const int T = panel.time_points();
    if (out.size() != static_cast<std::size_t>(K) * T)
        throw std::invalid_argument("cell term buffer has the wrong size");
    if (state.time_points() != T) throw std::invalid_argument("state and panel disagree on T");
    const long total = static_cast<long>(K) * T;
    auto body = [&](long i) {
        const int k = static_cast<int>(i / T);
        const int t = static_cast<int>(i % T) + 1;
        const Cell& c = panel.cell(k, t);
        out[i] = c.observed() ? cell_log_lik(*c.y, *c.n, panel.population(), state.theta[t],
                                             log_phi_value(spec, state, k, t), spec.use_exact_nchg)
                              : 0.0;
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < total; ++i) body(i);
    } else {
        for (long i = 0; i < total; ++i) body(i);
    }
}

double log_likelihood(const LatentState& state, const SurveyPanel& panel, const ModelSpec& spec, Exec exec) {
    std::vector<double> terms(static_cast<std::size_t>(panel.surveys()) * panel.time_points());
    cell_log_lik_terms(state, panel, spec, terms, exec);
    double ll = 0.0;
    for (double v : terms) ll += v;
    return ll;
}

LogDensityReport log_posterior(const LatentState& state, const SurveyPanel& panel, const ModelSpec& spec,
                               Exec exec) {
    LogDensityReport r;
    const double theta = log_prior_theta(state, spec);
    const double sigma = log_prior_sigma(state, spec);
    const double gamma = log_prior_gamma(state, spec);
    const double pi = log_prior_pi(state, spec);
    r.per_block["theta"] = theta;
    r.per_block["sigma_sq"] = sigma;
    r.per_block["gamma"] = gamma;
    r.per_block["pi_sq"] = pi;
    r.log_prior = theta;
    r.log_prior += sigma;
    r.log_prior += gamma;
    r.log_prior += pi;
    r.log_lik = log_likelihood(state, panel, spec, exec);
    r.per_block["likelihood"] = r.log_lik;
    r.log_post = r.log_prior + r.log_lik;
    return r;
}

} // namespace surveysynth
