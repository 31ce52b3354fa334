#include <gtest/gtest.h>

#include "surveysynth/datagen.hpp"
#include "surveysynth/model.hpp"

using namespace surveysynth;

namespace {

bool has_rule(const std::vector<Violation>& v, const std::string& prefix) {
    for (const auto& x : v)
        if (x.rule.rfind(prefix, 0) == 0) return true;
    return false;
}

ModelSpec three_spec(BiasKind biased) {
    ModelSpec s;
    s.bias = {{BiasKind::known, {}}, {biased, {}}, {biased, {}}};
    return s;
}

} // namespace

TEST(SurveyPanel, ShapeAndAccess) {
    SurveyPanel p(500, {"A", "B"}, 4);
    EXPECT_EQ(p.surveys(), 2);
    EXPECT_EQ(p.time_points(), 4);
    EXPECT_EQ(p.population(), 500);
    EXPECT_EQ(p.observed_count(), 0u);
    p.set(1, 4, 3, 10);
    EXPECT_TRUE(p.cell(1, 4).observed());
    EXPECT_FALSE(p.cell(0, 1).observed());
    EXPECT_EQ(p.survey_index("B"), 1);
    EXPECT_EQ(p.survey_index("C"), -1);
    EXPECT_THROW(p.cell(0, 0), std::out_of_range);
    EXPECT_THROW(p.cell(0, 5), std::out_of_range);
    EXPECT_THROW(p.cell(2, 1), std::out_of_range);
}

TEST(SurveyPanel, TruncateAndSubset) {
    const SurveyPanel p = illustrative_panel();
    const SurveyPanel t = p.truncated(4);
    EXPECT_EQ(t.time_points(), 4);
    EXPECT_EQ(t.cell(2, 4), p.cell(2, 4));
    const SurveyPanel s = p.subset({2, 0});
    EXPECT_EQ(s.labels(), (std::vector<std::string>{"Survey3", "Survey1"}));
    EXPECT_EQ(s.cell(0, 7), p.cell(2, 7));
    EXPECT_EQ(s.population(), p.population());
}

TEST(ValidatePanel, IllustrativeDataIsClean) { EXPECT_TRUE(validate_panel(illustrative_panel()).empty()); }

TEST(ValidatePanel, YExceedsN) {
    SurveyPanel p(100, {"A"}, 2);
    p.set(0, 1, 5, 3);
    const auto v = validate_panel(p);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].k, 0);
    EXPECT_EQ(v[0].t, 1);
    EXPECT_TRUE(has_rule(v, "y exceeds n at (0,1)"));
}

TEST(ValidatePanel, HalfMissingCell) {
    SurveyPanel p(100, {"A"}, 2);
    p.cell(0, 2).y = 4;
    const auto v = validate_panel(p);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_TRUE(has_rule(v, "half-missing cell"));
    EXPECT_EQ(v[0].t, 2);
}

TEST(ValidatePanel, OtherRules) {
    SurveyPanel p(100, {"A", "A"}, 1);
    p.set(0, 1, -1, 10);
    p.set(1, 1, 0, 0);
    SurveyPanel q(50, {"B"}, 1);
    q.set(0, 1, 10, 60);
    EXPECT_TRUE(has_rule(validate_panel(p), "negative y"));
    EXPECT_TRUE(has_rule(validate_panel(p), "n not positive"));
    EXPECT_TRUE(has_rule(validate_panel(p), "duplicate survey label"));
    EXPECT_TRUE(has_rule(validate_panel(q), "n exceeds N"));
}

TEST(SaturatedCells, BiasedSurveyAllYes) {
    SurveyPanel p = illustrative_panel();
    p.set(1, 3, 1000, 1000);
    const auto s = detect_saturated_cells(p, three_spec(BiasKind::walk));
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], std::make_pair(1, 3));
}

TEST(SaturatedCells, AnchorIgnoredAndInteriorClean) {
    SurveyPanel p = illustrative_panel();
    EXPECT_TRUE(detect_saturated_cells(p, three_spec(BiasKind::walk)).empty());
    p.set(0, 5, 100, 100);
    EXPECT_TRUE(detect_saturated_cells(p, three_spec(BiasKind::walk)).empty());
    p.set(2, 6, 0, 1000);
    EXPECT_EQ(detect_saturated_cells(p, three_spec(BiasKind::constant)).size(), 1u);
}

TEST(ModelSpec, Validate) {
    ModelSpec s = three_spec(BiasKind::linear);
    EXPECT_NO_THROW(s.validate(3, 10));
    EXPECT_THROW(s.validate(2, 10), std::invalid_argument);
    ModelSpec none;
    none.bias = {{BiasKind::walk, {}}};
    EXPECT_THROW(none.validate(1, 5), std::invalid_argument);
    ModelSpec fixed;
    fixed.bias = {{BiasKind::known, {1.0, 2.0}}};
    EXPECT_THROW(fixed.validate(1, 3), std::invalid_argument);
    EXPECT_NO_THROW(fixed.validate(1, 2));
    ModelSpec bad_prior = three_spec(BiasKind::walk);
    bad_prior.priors.eta0_sq = 0.0;
    EXPECT_THROW(bad_prior.validate(3, 10), std::invalid_argument);
}

TEST(PriorSpec, NarrowedValues) {
    const PriorSpec n = PriorSpec::narrowed();
    EXPECT_DOUBLE_EQ(n.Gamma0_sq, 1.0);
    EXPECT_DOUBLE_EQ(n.eta0_sq, 0.1);
    EXPECT_DOUBLE_EQ(n.gamma1_var, 0.01);
    EXPECT_DOUBLE_EQ(n.pi_sq_scale, 0.01);
    EXPECT_DOUBLE_EQ(n.gamma0_var, 1.0);
    EXPECT_DOUBLE_EQ(n.nu0, 0.0);
}

TEST(BiasKind, ParseRoundTrip) {
    for (BiasKind k : {BiasKind::known, BiasKind::constant, BiasKind::linear, BiasKind::walk})
        EXPECT_EQ(parse_bias_kind(to_string(k)), k);
    EXPECT_THROW(parse_bias_kind("quadratic"), std::invalid_argument);
    EXPECT_EQ(gamma_size(BiasKind::known, 7), 0);
    EXPECT_EQ(gamma_size(BiasKind::constant, 7), 1);
    EXPECT_EQ(gamma_size(BiasKind::linear, 7), 2);
    EXPECT_EQ(gamma_size(BiasKind::walk, 7), 8);
}

TEST(CheckState, DetectsViolations) {
    ModelSpec spec = three_spec(BiasKind::walk);
    spec.monotone_walk = true;
    LatentState s;
    s.theta = {0.0, 0.1, 0.2};
    s.sigma_sq = 0.5;
    s.gamma = {{}, {0, 0, 0}, {0, 0, 0}};
    s.pi_sq = 0.1;
    EXPECT_TRUE(check_state(s, spec).empty());
    LatentState down = s;
    down.theta[2] = 0.0;
    EXPECT_FALSE(check_state(down, spec).empty());
    LatentState no_pi = s;
    no_pi.pi_sq.reset();
    EXPECT_FALSE(check_state(no_pi, spec).empty());
    LatentState shape = s;
    shape.gamma[1].pop_back();
    EXPECT_FALSE(check_state(shape, spec).empty());
    LatentState var = s;
    var.sigma_sq = 0.0;
    EXPECT_FALSE(check_state(var, spec).empty());
}

TEST(SummaryTable, Lookup) {
    SummaryTable t;
    t.rates.push_back({"rate", "", 1, 0.2, 0.1, 0.3, 1.0, 100});
    t.rates.push_back({"rate", "", 2, 0.25, 0.15, 0.35, 1.0, 100});
    t.parameters.push_back({"phi", "1", 2, 1.5, 1.1, 2.0, 1.0, 100});
    ASSERT_NE(t.rate_at(2), nullptr);
    EXPECT_DOUBLE_EQ(t.rate_at(2)->median, 0.25);
    EXPECT_EQ(t.rate_at(3), nullptr);
    ASSERT_NE(t.find("phi", "1", 2), nullptr);
    EXPECT_DOUBLE_EQ(t.find("phi", "1", 2)->width(), 0.9);
    EXPECT_EQ(t.find("phi", "2", 2), nullptr);
}

TEST(SamplerSettings, Validate) {
    EXPECT_NO_THROW(SamplerSettings::full().validate());
    const SamplerSettings d = SamplerSettings::desk();
    EXPECT_EQ(d.n_chains, 4);
    EXPECT_EQ(d.burn_in, 5000);
    EXPECT_EQ(d.n_draws, 10000);
    EXPECT_EQ(d.thin, 5);
    SamplerSettings bad = d;
    bad.n_draws = 2;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = d;
    bad.n_chains = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}
