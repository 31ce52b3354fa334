#include <gtest/gtest.h>

#include "surveysynth/config.hpp"

using namespace surveysynth;

TEST(Config, MinimalDocumentKeepsDefaults) {
    const RunConfig c = parse_config(R"({"version": 1})");
    EXPECT_EQ(c.seed, 1u);
    EXPECT_DOUBLE_EQ(c.alpha, 0.05);
    EXPECT_EQ(c.sampler, SamplerSettings::desk());
    EXPECT_EQ(c.model.bias, BiasKind::walk);
}

TEST(Config, VersionRequiredAndChecked) {
    EXPECT_THROW(parse_config(R"({})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 2})"), ConfigError);
    EXPECT_THROW(parse_config("not json"), ConfigError);
}

TEST(Config, UnknownKeysRejectedAtEveryLevel) {
    EXPECT_THROW(parse_config(R"({"version": 1, "seeds": 3})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 1, "model": {"prior": {}}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 1, "model": {"priors": {"eta": 1}}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 1, "sampler": {"chains": 2}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 1, "sim_study": {"sampler": {"warmup": 2}}})"), ConfigError);
    try {
        parse_config(R"({"version": 1, "paths": {"outdir": "x"}})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("outdir"), std::string::npos);
    }
}

TEST(Config, TypeAndRangeErrors) {
    EXPECT_THROW(parse_config(R"({"version": 1, "seed": "x"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 1, "alpha": 1.5})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 1, "model": {"bias": "cubic"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 1, "model": {"priors": {"eta0_sq": -1}}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 1, "sampler": {"thin": 0}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 1, "sim_study": {"Ts": [0]}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"version": 1, "scale": "huge"})"), ConfigError);
}

TEST(Config, ValuesApplied) {
    const RunConfig c = parse_config(R"({
        "version": 1, "seed": 77, "alpha": 0.1, "scale": "full",
        "model": {"priors": {"nu0": -2}, "monotone_walk": true, "anchors": ["X"],
                  "bias": "linear", "bias_overrides": {"Y": "constant"}},
        "sampler": {"n_chains": 2},
        "design": {"preset": "illustrative", "regime": "narrowed"},
        "sim_study": {"Ts": [5, 10], "n_reps": 7},
        "paths": {"population": 1000, "out": "dir"}})");
    EXPECT_EQ(c.seed, 77u);
    EXPECT_DOUBLE_EQ(c.alpha, 0.1);
    EXPECT_EQ(c.scale, Scale::full);
    EXPECT_DOUBLE_EQ(c.model.priors.nu0, -2.0);
    EXPECT_TRUE(c.model.monotone_walk);
    EXPECT_EQ(c.model.anchors, (std::vector<std::string>{"X"}));
    EXPECT_EQ(c.model.bias, BiasKind::linear);
    EXPECT_EQ(c.model.bias_overrides.at("Y"), BiasKind::constant);
    EXPECT_EQ(c.sampler.n_chains, 2);
    EXPECT_EQ(c.sampler.burn_in, SamplerSettings::full().burn_in);
    EXPECT_EQ(c.design.preset, "illustrative");
    EXPECT_EQ(c.design.regime, PriorRegime::narrowed);
    EXPECT_EQ(c.sim_study.Ts, (std::vector<int>{5, 10}));
    EXPECT_EQ(c.sim_study.study.n_reps, 7);
    EXPECT_EQ(c.paths.population, 1000);
    EXPECT_EQ(c.paths.out, "dir");
}

TEST(Config, DumpParsesBack) {
    RunConfig c;
    c.seed = 5;
    c.model.anchors = {"A"};
    c.model.bias_overrides = {{"B", BiasKind::linear}};
    c.sim_study.Ts = {3, 4};
    const RunConfig back = parse_config(dump_config(c));
    EXPECT_EQ(dump_config(back), dump_config(c));
    EXPECT_EQ(back.model.bias_overrides, c.model.bias_overrides);
    EXPECT_EQ(back.sampler, c.sampler);
}

TEST(Config, ScalePresets) {
    RunConfig c;
    c.apply_scale(Scale::full);
    EXPECT_EQ(c.sampler, SamplerSettings::full());
    EXPECT_EQ(c.sim_study.Ts, (std::vector<int>{5, 10, 15}));
    c.apply_scale(Scale::desk);
    EXPECT_EQ(c.sampler, SamplerSettings::desk());
    EXPECT_THROW(parse_scale("medium"), ConfigError);
}

TEST(BuildModelSpec, AnchorsBiasAndOverrides) {
    const SurveyPanel p(1000, {"A", "B", "C"}, 4);
    ModelConfig m;
    m.bias = BiasKind::constant;
    m.bias_overrides = {{"C", BiasKind::walk}};
    m.monotone_walk = true;
    const ModelSpec s = build_model_spec(m, p);
    ASSERT_EQ(s.bias.size(), 3u);
    EXPECT_EQ(s.bias[0].kind, BiasKind::known);
    EXPECT_EQ(s.bias[1].kind, BiasKind::constant);
    EXPECT_EQ(s.bias[2].kind, BiasKind::walk);
    EXPECT_TRUE(s.monotone_walk);
    m.anchors = {"B"};
    const ModelSpec t = build_model_spec(m, p);
    EXPECT_EQ(t.bias[0].kind, BiasKind::constant);
    EXPECT_EQ(t.bias[1].kind, BiasKind::known);
    m.anchors = {"Z"};
    EXPECT_THROW(build_model_spec(m, p), ConfigError);
}

TEST(SelectSurveys, SubsetsInOrder) {
    SurveyPanel p(1000, {"A", "B", "C"}, 2);
    p.set(2, 1, 1, 10);
    ModelConfig m;
    EXPECT_EQ(select_surveys(m, p), p);
    m.surveys = {"C", "A"};
    const SurveyPanel s = select_surveys(m, p);
    EXPECT_EQ(s.labels(), (std::vector<std::string>{"C", "A"}));
    EXPECT_TRUE(s.cell(0, 1).observed());
    m.surveys = {"Q"};
    EXPECT_THROW(select_surveys(m, p), ConfigError);
}
