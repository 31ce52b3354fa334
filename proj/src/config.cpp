#include "surveysynth/config.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace surveysynth {

namespace {

using json = nlohmann::json;

/// Reads the keys of one JSON object, rejecting any it was not asked about.
class Section {
public:
    Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + "expected an object");
        for (const auto& [key, value] : j_.items())
            if (!allowed.count(key)) throw ConfigError(where() + "unknown key '" + key + "'");
    }

    template <class F>
    auto wrap(F&& f) const {
        try {
            return f();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where() + e.what());
        }
    }

    template <class T>
    void get(const char* key, T& target) const {
        if (!j_.contains(key)) return;
        try {
            target = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where() + "wrong type for '" + key + "'");
        }
    }
    void get_kind(const char* key, BiasKind& target) const {
        std::string text;
        if (!j_.contains(key)) return;
        get(key, text);
        target = wrap([&] { return parse_bias_kind(text); });
    }
    bool has(const char* key) const { return j_.contains(key); }
    Section sub(const char* key, std::set<std::string> allowed) const {
        return Section(j_.at(key), path_ + key + ".", std::move(allowed));
    }
    const json& raw(const char* key) const { return j_.at(key); }

    std::string where() const { return path_.empty() ? std::string() : path_.substr(0, path_.size() - 1) + ": "; }

private:
    const json& j_;
    std::string path_;
};

void read_sampler(const Section& s, SamplerSettings& out) {
    s.get("n_chains", out.n_chains);
    s.get("burn_in", out.burn_in);
    s.get("n_draws", out.n_draws);
    s.get("thin", out.thin);
    s.get("target_accept", out.target_accept);
    s.get("adapt_window", out.adapt_window);
}

const std::set<std::string> kSamplerKeys = {"n_chains", "burn_in", "n_draws", "thin", "target_accept", "adapt_window"};

json sampler_json(const SamplerSettings& s) {
    return {{"n_chains", s.n_chains}, {"burn_in", s.burn_in},         {"n_draws", s.n_draws},
            {"thin", s.thin},         {"target_accept", s.target_accept}, {"adapt_window", s.adapt_window}};
}

} // namespace

Scale parse_scale(std::string_view text) {
    if (text == "desk") return Scale::desk;
    if (text == "full") return Scale::full;
    throw ConfigError("unknown scale '" + std::string(text) + "' (expected desk or full)");
}

void RunConfig::apply_scale(Scale s) {
    scale = s;
    sampler = s == Scale::desk ? SamplerSettings::desk() : SamplerSettings::full();
    sim_study.study = s == Scale::desk ? SimStudyConfig::desk() : SimStudyConfig::full();
    if (s == Scale::full) sim_study.Ts = {5, 10, 15};
}

RunConfig parse_config(const std::string& json_text, RunConfig base) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c = std::move(base);
    const Section top(doc, "", {"version", "seed", "alpha", "scale", "model", "sampler", "design", "sim_study", "paths"});
    if (!top.has("version")) throw ConfigError("config needs \"version\": " + std::to_string(kConfigVersion));
    top.get("version", c.version);
    if (c.version != kConfigVersion)
        throw ConfigError("unsupported config version " + std::to_string(c.version));
    if (top.has("scale")) {
        std::string s;
        top.get("scale", s);
        c.apply_scale(parse_scale(s));
    }
    top.get("seed", c.seed);
    top.get("alpha", c.alpha);

    if (top.has("model")) {
        const Section m = top.sub("model", {"priors", "monotone_walk", "center_time", "exact_nchg", "anchors", "bias",
                                            "bias_overrides", "surveys"});
        if (m.has("priors")) {
            const Section p = m.sub("priors", {"eta0_sq", "nu0", "Gamma0_sq", "gamma0_var", "gamma1_var", "pi_sq_scale"});
            p.get("eta0_sq", c.model.priors.eta0_sq);
            p.get("nu0", c.model.priors.nu0);
            p.get("Gamma0_sq", c.model.priors.Gamma0_sq);
            p.get("gamma0_var", c.model.priors.gamma0_var);
            p.get("gamma1_var", c.model.priors.gamma1_var);
            p.get("pi_sq_scale", c.model.priors.pi_sq_scale);
        }
        m.get("monotone_walk", c.model.monotone_walk);
        m.get("center_time", c.model.center_time);
        m.get("exact_nchg", c.model.exact_nchg);
        m.get("anchors", c.model.anchors);
        m.get_kind("bias", c.model.bias);
        m.get("surveys", c.model.surveys);
        if (m.has("bias_overrides")) {
            const json& o = m.raw("bias_overrides");
            if (!o.is_object()) throw ConfigError("model.bias_overrides: expected an object");
            c.model.bias_overrides.clear();
            for (const auto& [label, kind] : o.items()) {
                if (!kind.is_string()) throw ConfigError("model.bias_overrides: wrong type for '" + label + "'");
                c.model.bias_overrides[label] = m.wrap([&] { return parse_bias_kind(kind.get<std::string>()); });
            }
        }
    }
    if (top.has("sampler")) read_sampler(top.sub("sampler", kSamplerKeys), c.sampler);

    if (top.has("design")) {
        const Section d = top.sub("design", {"preset", "T", "N", "anchor_n", "biased_n", "bias", "regime", "monotone_walk"});
        d.get("preset", c.design.preset);
        d.get("T", c.design.T);
        d.get("N", c.design.N);
        d.get("anchor_n", c.design.anchor_n);
        d.get("biased_n", c.design.biased_n);
        d.get_kind("bias", c.design.bias);
        d.get("monotone_walk", c.design.monotone_walk);
        if (d.has("regime")) {
            std::string r;
            d.get("regime", r);
            c.design.regime = d.wrap([&] { return parse_prior_regime(r); });
        }
    }

    if (top.has("sim_study")) {
        const Section s = top.sub("sim_study", {"Ts", "n_reps", "N", "anchor_n", "biased_n", "regime", "sampler"});
        s.get("Ts", c.sim_study.Ts);
        s.get("n_reps", c.sim_study.study.n_reps);
        s.get("N", c.sim_study.study.N);
        s.get("anchor_n", c.sim_study.study.anchor_n);
        s.get("biased_n", c.sim_study.study.biased_n);
        if (s.has("regime")) {
            std::string r;
            s.get("regime", r);
            c.sim_study.study.regime = s.wrap([&] { return parse_prior_regime(r); });
        }
        if (s.has("sampler")) read_sampler(s.sub("sampler", kSamplerKeys), c.sim_study.study.sampler);
    }

    if (top.has("paths")) {
        const Section p = top.sub("paths", {"panel", "records", "benchmark", "benchmark_label", "population",
                                            "baseline", "method", "out"});
        p.get("panel", c.paths.panel);
        p.get("records", c.paths.records);
        p.get("benchmark", c.paths.benchmark);
        p.get("benchmark_label", c.paths.benchmark_label);
        p.get("population", c.paths.population);
        p.get("baseline", c.paths.baseline);
        p.get("method", c.paths.method);
        p.get("out", c.paths.out);
    }

    try {
        c.model.priors.validate();
        c.sampler.validate();
        c.sim_study.study.sampler.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (c.sim_study.study.n_reps < 1) throw ConfigError("sim_study.n_reps must be at least 1");
    for (int T : c.sim_study.Ts)
        if (T < 1) throw ConfigError("sim_study.Ts entries must be at least 1");
    return c;
}

std::string dump_config(const RunConfig& c) {
    json overrides = json::object();
    for (const auto& [label, kind] : c.model.bias_overrides) overrides[label] = std::string(to_string(kind));
    const PriorSpec& p = c.model.priors;
    const SimStudyConfig& s = c.sim_study.study;
    json j = {
        {"version", c.version},
        {"seed", c.seed},
        {"alpha", c.alpha},
        {"scale", c.scale == Scale::desk ? "desk" : "full"},
        {"model",
         {{"priors",
           {{"eta0_sq", p.eta0_sq},
            {"nu0", p.nu0},
            {"Gamma0_sq", p.Gamma0_sq},
            {"gamma0_var", p.gamma0_var},
            {"gamma1_var", p.gamma1_var},
            {"pi_sq_scale", p.pi_sq_scale}}},
          {"monotone_walk", c.model.monotone_walk},
          {"center_time", c.model.center_time},
          {"exact_nchg", c.model.exact_nchg},
          {"anchors", c.model.anchors},
          {"bias", std::string(to_string(c.model.bias))},
          {"bias_overrides", overrides},
          {"surveys", c.model.surveys}}},
        {"sampler", sampler_json(c.sampler)},
        {"design",
         {{"preset", c.design.preset},
          {"T", c.design.T},
          {"N", c.design.N},
          {"anchor_n", c.design.anchor_n},
          {"biased_n", c.design.biased_n},
          {"bias", std::string(to_string(c.design.bias))},
          {"regime", std::string(to_string(c.design.regime))},
          {"monotone_walk", c.design.monotone_walk}}},
        {"sim_study",
         {{"Ts", c.sim_study.Ts},
          {"n_reps", s.n_reps},
          {"N", s.N},
          {"anchor_n", s.anchor_n},
          {"biased_n", s.biased_n},
          {"regime", std::string(to_string(s.regime))},
          {"sampler", sampler_json(s.sampler)}}},
        {"paths",
         {{"panel", c.paths.panel},
          {"records", c.paths.records},
          {"benchmark", c.paths.benchmark},
          {"benchmark_label", c.paths.benchmark_label},
          {"population", c.paths.population},
          {"baseline", c.paths.baseline},
          {"method", c.paths.method},
          {"out", c.paths.out}}},
    };
    return j.dump(2) + "\n";
}

ModelSpec build_model_spec(const ModelConfig& model, const SurveyPanel& panel) {
    auto require = [&](const std::string& label) {
        if (panel.survey_index(label) < 0) throw ConfigError("survey '" + label + "' is not in the panel");
    };
    for (const auto& a : model.anchors) require(a);
    for (const auto& [label, kind] : model.bias_overrides) require(label);

    ModelSpec spec;
    spec.priors = model.priors;
    spec.monotone_walk = model.monotone_walk;
    spec.center_time = model.center_time;
    spec.use_exact_nchg = model.exact_nchg;
    for (int k = 0; k < panel.surveys(); ++k) {
        const std::string& label = panel.label(k);
        const bool anchor = model.anchors.empty()
                                ? k == 0
                                : std::find(model.anchors.begin(), model.anchors.end(), label) != model.anchors.end();
        BiasKind kind = anchor ? BiasKind::known : model.bias;
        if (auto it = model.bias_overrides.find(label); it != model.bias_overrides.end()) kind = it->second;
        spec.bias.push_back({kind, {}});
    }
    try {
        spec.validate(panel.surveys(), panel.time_points());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

SurveyPanel select_surveys(const ModelConfig& model, const SurveyPanel& panel) {
    if (model.surveys.empty()) return panel;
    std::vector<int> idx;
    for (const auto& label : model.surveys) {
        const int k = panel.survey_index(label);
        if (k < 0) throw ConfigError("survey '" + label + "' is not in the panel");
        idx.push_back(k);
    }
    return panel.subset(idx);
}

} // namespace surveysynth
