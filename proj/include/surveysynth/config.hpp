#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveysynth/datagen.hpp"
#include "surveysynth/model.hpp"
#include "surveysynth/simstudy.hpp"

namespace surveysynth {

/// Bad configuration document or option value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kConfigVersion = 1;

enum class Scale { desk, full };
Scale parse_scale(std::string_view text);

struct ModelConfig {
    PriorSpec priors;
    bool monotone_walk = false;
    bool center_time = true;
    bool exact_nchg = false;
    /// Surveys fixed at phi = 1. Empty means the first survey of the panel.
    std::vector<std::string> anchors;
    /// Bias kind of every non-anchor survey.
    BiasKind bias = BiasKind::walk;
    /// Per-survey kinds that win over `anchors` and `bias`.
    std::map<std::string, BiasKind> bias_overrides;
    /// Restrict the panel to these surveys (in this order) before fitting.
    std::vector<std::string> surveys;
};

struct DesignConfig {
    std::string preset = "three-surveys"; // three-surveys | illustrative | vaccine
    int T = 10;
    Count N = 10000;
    Count anchor_n = 100;
    Count biased_n = 1000;
    BiasKind bias = BiasKind::walk;
    PriorRegime regime = PriorRegime::standard;
    bool monotone_walk = false;
};

struct SimStudyOptions {
    std::vector<int> Ts = {5};
    SimStudyConfig study = SimStudyConfig::desk();
};

struct PathConfig {
    std::string panel;
    std::string records;
    std::string benchmark;
    std::string benchmark_label = kWeeklyBiased;
    Count population = 0; // for align; 0 means unset
    std::string baseline;
    std::string method;
    std::string out = "out";
};

struct RunConfig {
    int version = kConfigVersion;
    std::uint64_t seed = 1;
    double alpha = 0.05;
    Scale scale = Scale::desk;
    ModelConfig model;
    SamplerSettings sampler = SamplerSettings::desk();
    DesignConfig design;
    SimStudyOptions sim_study;
    PathConfig paths;

    /// Sampler and sim-study defaults of the given scale.
    void apply_scale(Scale s);
};

/// Overlays a JSON document on `base`. Unknown keys at any level, wrong
/// types and a version other than kConfigVersion raise ConfigError.
RunConfig parse_config(const std::string& json_text, RunConfig base = {});

/// Full document with every field, suitable as a template.
std::string dump_config(const RunConfig& config);

/// Model spec for a panel: anchors known, others `bias`, then overrides.
/// Throws ConfigError when a named survey is not in the panel.
ModelSpec build_model_spec(const ModelConfig& model, const SurveyPanel& panel);

/// Applies ModelConfig::surveys (identity when empty).
SurveyPanel select_surveys(const ModelConfig& model, const SurveyPanel& panel);

} // namespace surveysynth
