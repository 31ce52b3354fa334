#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "surveysynth/datagen.hpp"
#include "surveysynth/dists.hpp"
#include "surveysynth/likelihood.hpp"

using namespace surveysynth;

namespace {

ModelSpec spec_of(std::vector<BiasKind> kinds) {
    ModelSpec s;
    for (BiasKind k : kinds) s.bias.push_back({k, {}});
    return s;
}

LatentState flat_state(int T, const ModelSpec& spec) {
    LatentState s;
    s.theta.assign(T + 1, -1.0);
    s.sigma_sq = 0.3;
    for (const auto& b : spec.bias) s.gamma.emplace_back(gamma_size(b.kind, T), 0.0);
    if (spec.has_walk_bias()) s.pi_sq = 0.2;
    return s;
}

} // namespace

TEST(PhiValue, Anchor) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::walk});
    LatentState s = flat_state(5, spec);
    s.gamma[1] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    for (int t = 1; t <= 5; ++t) EXPECT_EQ(phi_value(spec, s, 0, t), 1.0);
    EXPECT_NEAR(phi_value(spec, s, 1, 3), std::exp(0.4), 1e-15);
    EXPECT_NEAR(phi_value(spec, s, 1, 5), std::exp(0.6), 1e-15);
}

TEST(PhiValue, FixedKnownPhi) {
    ModelSpec spec = spec_of({BiasKind::known});
    spec.bias[0].fixed_phi = {1.5, 2.0};
    const LatentState s = flat_state(2, spec);
    EXPECT_NEAR(phi_value(spec, s, 0, 2), 2.0, 1e-15);
}

TEST(PhiValue, LinearCentred) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::linear});
    LatentState s = flat_state(10, spec);
    s.gamma[1] = {0.0, 0.1};
    EXPECT_DOUBLE_EQ(phi_value(spec, s, 1, 5), 1.0);
    EXPECT_NEAR(phi_value(spec, s, 1, 7), std::exp(0.2), 1e-15);
    ModelSpec raw = spec;
    raw.center_time = false;
    EXPECT_NEAR(phi_value(raw, s, 1, 5), std::exp(0.5), 1e-15);
}

TEST(PhiValue, Constant) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::constant});
    LatentState s = flat_state(4, spec);
    s.gamma[1] = {std::log(2.0)};
    for (int t = 1; t <= 4; ++t) EXPECT_NEAR(phi_value(spec, s, 1, t), 2.0, 1e-15);
}

TEST(PhiValue, ShapeMismatch) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::linear});
    LatentState s = flat_state(4, spec);
    s.gamma[1] = {0.0};
    EXPECT_THROW(phi_value(spec, s, 1, 2), std::invalid_argument);
}

TEST(PhiValue, CentredLinearMirror) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::linear});
    for (int T : {4, 5, 10, 15}) {
        LatentState s = flat_state(T, spec);
        s.gamma[1] = {0.37, -0.21};
        for (int t = 1; t <= T; ++t) {
            const double mirror_time = T - t; // 2 * (T/2) - t
            const double mirror_log_phi = s.gamma[1][0] + s.gamma[1][1] * (mirror_time - 0.5 * T);
            EXPECT_NEAR(phi_value(spec, s, 1, t) * std::exp(mirror_log_phi), std::exp(2 * 0.37), 1e-12);
        }
    }
}

TEST(PhiValue, ConstantAndWalkIgnoreHorizon) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::constant, BiasKind::walk});
    LatentState a = flat_state(6, spec);
    a.gamma[1] = {0.4};
    a.gamma[2] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    LatentState b = flat_state(3, spec);
    b.gamma[1] = {0.4};
    b.gamma[2] = {0.0, 0.1, 0.2, 0.3};
    for (int t = 1; t <= 3; ++t) {
        EXPECT_EQ(phi_value(spec, a, 1, t), phi_value(spec, b, 1, t));
        EXPECT_EQ(phi_value(spec, a, 2, t), phi_value(spec, b, 2, t));
    }
}

TEST(LogPrior, SinglePointTheta) {
    const ModelSpec spec = spec_of({BiasKind::known});
    LatentState s;
    s.theta = {0.0};
    s.sigma_sq = 1.0;
    s.gamma = {{}};
    EXPECT_NEAR(log_prior_theta(s, spec), -0.5 * std::log(4.0 * M_PI), 1e-14);
    EXPECT_NEAR(log_prior_theta(s, spec), -1.2655, 5e-5);
}

TEST(LogPrior, MonotoneViolation) {
    ModelSpec spec = spec_of({BiasKind::known});
    spec.monotone_walk = true;
    LatentState s = flat_state(3, spec);
    s.theta = {0.0, -0.1, 0.2, 0.3};
    EXPECT_EQ(log_prior(s, spec), -kInf);
    s.theta = {0.0, 0.1, 0.2, 0.3};
    EXPECT_TRUE(std::isfinite(log_prior(s, spec)));
}

TEST(LogPrior, NonPositiveVariance) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::walk});
    LatentState s = flat_state(3, spec);
    s.sigma_sq = 0.0;
    EXPECT_EQ(log_prior(s, spec), -kInf);
    s = flat_state(3, spec);
    s.pi_sq = -1.0;
    EXPECT_EQ(log_prior(s, spec), -kInf);
}

TEST(LogPrior, ClosedFormForEveryBlock) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::constant, BiasKind::linear, BiasKind::walk});
    LatentState s = flat_state(2, spec);
    s.theta = {0.2, 0.5, 0.1};
    s.sigma_sq = 0.4;
    s.gamma[1] = {0.3};
    s.gamma[2] = {-0.2, 0.05};
    s.gamma[3] = {0.1, 0.0, 0.4};
    s.pi_sq = 0.25;
    const PriorSpec& p = spec.priors;
    const double theta = std::log(oracle::normal_pdf(0.2, p.nu0, p.Gamma0_sq)) +
                         std::log(oracle::normal_pdf(0.5, 0.2, 0.4)) + std::log(oracle::normal_pdf(0.1, 0.5, 0.4));
    const double sigma = std::log(2.0 * oracle::normal_pdf(0.4, 0.0, p.eta0_sq));
    const double gamma = std::log(oracle::normal_pdf(0.3, 0.0, 1.0)) + std::log(oracle::normal_pdf(-0.2, 0.0, 1.0)) +
                         std::log(oracle::normal_pdf(0.05, 0.0, 0.25)) + std::log(oracle::normal_pdf(0.1, 0.0, 1.0)) +
                         std::log(oracle::normal_pdf(0.0, 0.1, 0.25)) + std::log(oracle::normal_pdf(0.4, 0.0, 0.25));
    const double pi = std::log(2.0 * oracle::normal_pdf(0.25, 0.0, p.pi_sq_scale));
    EXPECT_NEAR(log_prior_theta(s, spec), theta, 1e-12);
    EXPECT_NEAR(log_prior_sigma(s, spec), sigma, 1e-12);
    EXPECT_NEAR(log_prior_gamma(s, spec), gamma, 1e-12);
    EXPECT_NEAR(log_prior_pi(s, spec), pi, 1e-12);
    EXPECT_NEAR(log_prior(s, spec), theta + sigma + gamma + pi, 1e-12);
}

TEST(LogPrior, MonotoneIncrementIsHalfNormal) {
    EXPECT_NEAR(theta_increment_logpdf(0.3, 0.8, 0.5, true), std::log(2.0) + normal_logpdf(0.8, 0.3, 0.5), 1e-13);
    EXPECT_NEAR(theta_increment_logpdf(0.3, 0.8, 0.5, false), normal_logpdf(0.8, 0.3, 0.5), 1e-15);
}

TEST(LogLikelihood, AllMissing) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::walk});
    const SurveyPanel p(1000, {"A", "B"}, 4);
    EXPECT_EQ(log_likelihood(flat_state(4, spec), p, spec), 0.0);
}

TEST(LogLikelihood, SingleCellBinomial) {
    const ModelSpec spec = spec_of({BiasKind::known});
    SurveyPanel p(10000, {"Survey1"}, 1);
    p.set(0, 1, 9, 100);
    LatentState s = flat_state(1, spec);
    s.theta[1] = logit(0.09);
    const double direct = oracle::choose(100, 9) * std::pow(0.09, 9) * std::pow(0.91, 91);
    EXPECT_NEAR(log_likelihood(s, p, spec), std::log(direct), 1e-11);
    EXPECT_NEAR(std::exp(log_likelihood(s, p, spec)), 0.1381, 5e-5);
}

TEST(LogLikelihood, UnitOddsIsPlainBinomial) {
    const SurveyPanel p = illustrative_panel();
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::known, BiasKind::known});
    LatentState s = flat_state(10, spec);
    for (int t = 0; t <= 10; ++t) s.theta[t] = -2.0 + 0.1 * t;
    double expected = 0.0;
    for (int k = 0; k < 3; ++k)
        for (int t = 1; t <= 10; ++t) {
            const Cell& c = p.cell(k, t);
            const double q = oracle::expit(s.theta[t]);
            expected += std::log(oracle::choose(static_cast<int>(*c.n), static_cast<int>(*c.y))) +
                        static_cast<double>(*c.y) * std::log(q) + static_cast<double>(*c.n - *c.y) * std::log(1 - q);
        }
    EXPECT_NEAR(log_likelihood(s, p, spec), expected, 1e-8);
}

TEST(LogLikelihood, BiasedCellUsesBiasedProbability) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::constant});
    SurveyPanel p(10000, {"A", "B"}, 1);
    p.set(1, 1, 300, 1000);
    LatentState s = flat_state(1, spec);
    s.theta[1] = logit(0.2);
    s.gamma[1] = {std::log(1.8)};
    const double q = biased_success_prob(0.2, 1.8);
    EXPECT_NEAR(log_likelihood(s, p, spec), binomial_logpmf(300, 1000, q), 1e-9);
}

TEST(LogLikelihood, ExactAgreesWithApproximationAtLargeN) {
    const Count N = 10'000'000;
    for (double rate : {0.05, 0.3, 0.7})
        for (double phi : {0.5, 1.0, 2.5})
            for (Count n : {100, 1000}) {
                const double q = biased_success_prob(rate, phi);
                for (double f : {0.8, 1.0, 1.2}) {
                    const Count y = std::min<Count>(n, std::llround(q * n * f));
                    const double approx = cell_log_lik(y, n, N, logit(rate), std::log(phi), false);
                    const double exact = cell_log_lik(y, n, N, logit(rate), std::log(phi), true);
                    EXPECT_LT(std::abs(approx - exact), 0.05) << rate << " " << phi << " " << n << " " << y;
                }
            }
}

TEST(LogPosterior, ReportIsAdditive) {
    const SurveyPanel p = illustrative_panel();
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::walk, BiasKind::linear});
    const LatentState s = flat_state(10, spec);
    const LogDensityReport r = log_posterior(s, p, spec);
    EXPECT_EQ(r.log_post, r.log_prior + r.log_lik);
    double prior = r.per_block.at("theta");
    prior += r.per_block.at("sigma_sq");
    prior += r.per_block.at("gamma");
    prior += r.per_block.at("pi_sq");
    EXPECT_EQ(prior, r.log_prior);
    EXPECT_EQ(r.per_block.at("likelihood"), r.log_lik);
    EXPECT_EQ(r.log_prior, log_prior(s, spec));
}

TEST(LogPosterior, EmptyPanel) {
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::walk});
    const SurveyPanel p(1000, {"A", "B"}, 3);
    const LatentState s = flat_state(3, spec);
    const LogDensityReport r = log_posterior(s, p, spec);
    EXPECT_EQ(r.log_lik, 0.0);
    EXPECT_EQ(r.log_post, r.log_prior);
}

TEST(LogPosterior, FiniteForPriorDraws) {
    const SurveyPanel p = illustrative_panel();
    for (BiasKind kind : {BiasKind::constant, BiasKind::linear, BiasKind::walk})
        for (PriorRegime regime : {PriorRegime::standard, PriorRegime::narrowed}) {
            GenDesign d = GenDesign::three_surveys(10, 10000, 100, 1000, kind, regime);
            Rng rng(derive_seed(5, {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(regime)}));
            ModelSpec spec = d.model_spec();
            for (int i = 0; i < 200; ++i) {
                const LatentState s = draw_parameters(d, rng);
                const LogDensityReport r = log_posterior(s, p, spec);
                ASSERT_TRUE(std::isfinite(r.log_post));
                spec.use_exact_nchg = true;
                ASSERT_FALSE(std::isnan(log_likelihood(s, p, spec)));
                spec.use_exact_nchg = false;
            }
        }
}

TEST(LogPosterior, FiniteForExtremeStates) {
    const SurveyPanel p = illustrative_panel();
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::walk, BiasKind::walk});
    LatentState s = flat_state(10, spec);
    for (double v : {-40.0, 40.0}) {
        for (auto& th : s.theta) th = v;
        EXPECT_FALSE(std::isnan(log_posterior(s, p, spec).log_post));
        EXPECT_TRUE(std::isfinite(log_posterior(s, p, spec).log_post));
    }
}

TEST(CellTerms, SerialAndParallelBitIdentical) {
    const SurveyPanel p = illustrative_panel();
    for (bool exact : {false, true}) {
        ModelSpec spec = spec_of({BiasKind::known, BiasKind::walk, BiasKind::linear});
        spec.use_exact_nchg = exact;
        LatentState s = flat_state(10, spec);
        for (int t = 0; t <= 10; ++t) s.theta[t] = -2.2 + 0.07 * t;
        s.gamma[1] = {0.0, 0.3, 0.5, 0.2, 0.9, 1.0, 0.8, 0.7, 0.6, 0.9, 1.1};
        s.gamma[2] = {1.0, 0.05};
        std::vector<double> a(30), b(30);
        cell_log_lik_terms(s, p, spec, a, Exec::serial);
        cell_log_lik_terms(s, p, spec, b, Exec::parallel);
        EXPECT_EQ(a, b);
        EXPECT_EQ(log_likelihood(s, p, spec, Exec::serial), log_likelihood(s, p, spec, Exec::parallel));
    }
}

TEST(CellTerms, BufferShapeChecked) {
    const SurveyPanel p = illustrative_panel();
    const ModelSpec spec = spec_of({BiasKind::known, BiasKind::known, BiasKind::known});
    std::vector<double> wrong(29);
    EXPECT_THROW(cell_log_lik_terms(flat_state(10, spec), p, spec, wrong), std::invalid_argument);
    std::vector<double> ok(30);
    EXPECT_THROW(cell_log_lik_terms(flat_state(9, spec), p, spec, ok), std::invalid_argument);
}
