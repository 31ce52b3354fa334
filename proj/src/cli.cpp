#include "surveysynth/cli.hpp"

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "surveysynth/analysis.hpp"
#include "surveysynth/config.hpp"
#include "surveysynth/csv_io.hpp"
#include "surveysynth/datagen.hpp"
#include "surveysynth/mcmc.hpp"
#include "surveysynth/simstudy.hpp"

namespace surveysynth {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string scale;
    std::vector<std::string> bias;
    bool exact_nchg = false;
    bool monotone = false;
    std::optional<double> alpha;

    std::string preset;
    std::optional<int> T;
    std::string regime;

    std::string panel;
    std::vector<std::string> anchors;
    std::vector<std::string> surveys;

    std::vector<int> Ts;
    std::optional<int> reps;

    std::string records;
    std::string benchmark_label;
    std::optional<Count> population;

    std::string baseline;
    std::string method;
    std::string benchmark;
    std::string anchor_panel;
    std::string anchor_label;
};

/// Collects written files and key figures for the run summary.
class Summary {
public:
    explicit Summary(std::string command) : command_(std::move(command)) {}
    void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
    void file(const fs::path& p) { files_.push_back(p.string()); }
    void print(std::ostream& os, double seconds) const {
        os << "surveysynth " << command_ << "\n";
        for (const auto& [k, v] : lines_) os << "  " << std::left << std::setw(24) << k << v << "\n";
        os << "  " << std::left << std::setw(24) << "elapsed_s" << std::fixed << std::setprecision(2) << seconds
           << "\n";
        for (const auto& f : files_) os << "  wrote " << f << "\n";
    }

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> lines_;
    std::vector<std::string> files_;
};

void configure_workers() {
    if (const char* env = std::getenv(kWorkersEnv); env && *env) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (*end != '\0' || n < 1) throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer");
        omp_set_num_threads(static_cast<int>(n));
    }
}

RunConfig resolve_config(const Flags& f) {
    RunConfig c;
    if (!f.scale.empty()) c.apply_scale(parse_scale(f.scale));
    if (!f.config.empty()) c = parse_config(read_text_file(f.config), c);
    if (f.seed) c.seed = *f.seed;
    if (!f.out.empty()) c.paths.out = f.out;
    if (f.alpha) {
        if (!(*f.alpha > 0.0 && *f.alpha < 1.0)) throw ConfigError("--alpha must lie in (0,1)");
        c.alpha = *f.alpha;
    }
    for (const auto& b : f.bias) {
        try {
            if (const auto eq = b.find('='); eq != std::string::npos)
                c.model.bias_overrides[b.substr(0, eq)] = parse_bias_kind(b.substr(eq + 1));
            else
                c.design.bias = c.model.bias = parse_bias_kind(b);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--bias: ") + e.what());
        }
    }
    if (f.exact_nchg) c.model.exact_nchg = true;
    if (f.monotone) c.model.monotone_walk = c.design.monotone_walk = true;
    if (!f.preset.empty()) c.design.preset = f.preset;
    if (f.T) c.design.T = *f.T;
    if (!f.regime.empty()) {
        try {
            c.design.regime = c.sim_study.study.regime = parse_prior_regime(f.regime);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--regime: ") + e.what());
        }
    }
    if (!f.panel.empty()) c.paths.panel = f.panel;
    if (!f.anchors.empty()) c.model.anchors = f.anchors;
    if (!f.surveys.empty()) c.model.surveys = f.surveys;
    if (!f.Ts.empty()) c.sim_study.Ts = f.Ts;
    if (f.reps) c.sim_study.study.n_reps = *f.reps;
    if (!f.records.empty()) c.paths.records = f.records;
    if (!f.benchmark_label.empty()) c.paths.benchmark_label = f.benchmark_label;
    if (f.population) c.paths.population = *f.population;
    if (!f.baseline.empty()) c.paths.baseline = f.baseline;
    if (!f.method.empty()) c.paths.method = f.method;
    if (!f.benchmark.empty()) c.paths.benchmark = f.benchmark;
    c.sampler.seed = c.seed;
    c.sim_study.study.seed = c.seed;
    if (c.sim_study.study.n_reps < 1) throw ConfigError("--reps must be at least 1");
    for (int T : c.sim_study.Ts)
        if (T < 1) throw ConfigError("--T entries must be at least 1");
    return c;
}

template <class Writer>
std::string render(Writer&& w) {
    std::ostringstream ss;
    w(ss);
    return ss.str();
}

void emit(Summary& s, const fs::path& path, const std::string& text) {
    write_text_file(path, text);
    s.file(path);
}

SurveyPanel load_panel(const std::string& path) {
    if (path.empty()) throw ConfigError("no panel given (use --panel or paths.panel)");
    std::istringstream in(read_text_file(path));
    SurveyPanel panel = read_panel_csv(in);
    const auto violations = validate_panel(panel);
    if (!violations.empty()) {
        std::string msg = "panel '" + path + "' is invalid:";
        for (std::size_t i = 0; i < violations.size() && i < 5; ++i) msg += " " + violations[i].rule + ";";
        if (violations.size() > 5) msg += " (" + std::to_string(violations.size() - 5) + " more)";
        throw DataError(msg);
    }
    return panel;
}

SummaryTable load_summary(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("no ") + what + " summary given");
    std::istringstream in(read_text_file(path));
    return read_summary_csv(in);
}

/// Survey indices in parameter rows become labels.
SummaryTable label_rows(SummaryTable table, const SurveyPanel& panel) {
    for (auto& r : table.parameters)
        if (!r.survey.empty()) r.survey = panel.label(std::stoi(r.survey));
    return table;
}

std::string fmt(double x) { return format_double(x); }

std::string describe_spec(const ModelSpec& spec, const SurveyPanel& panel) {
    std::string s;
    for (int k = 0; k < panel.surveys(); ++k) {
        if (k) s += ", ";
        s += panel.label(k) + "=" + std::string(to_string(spec.bias[k].kind));
    }
    return s;
}

json diagnostics_json(const FitResult& fit, const SurveyPanel& panel, const ModelSpec& spec,
                      const SamplerSettings& settings) {
    json sat = json::array();
    for (const auto& [k, t] : fit.saturated) sat.push_back({{"survey", panel.label(k)}, {"t", t}});
    json bias = json::object();
    for (int k = 0; k < panel.surveys(); ++k) bias[panel.label(k)] = std::string(to_string(spec.bias[k].kind));
    return {{"converged", fit.table.converged},
            {"r_hat", fit.diagnostics.r_hat},
            {"ess", fit.diagnostics.ess},
            {"acceptance", fit.acceptance},
            {"saturated_cells", sat},
            {"bias", bias},
            {"monotone_walk", spec.monotone_walk},
            {"exact_nchg", spec.use_exact_nchg},
            {"sampler",
             {{"n_chains", settings.n_chains},
              {"burn_in", settings.burn_in},
              {"n_draws", settings.n_draws},
              {"thin", settings.thin},
              {"seed", settings.seed}}}};
}

void run_simulate(const RunConfig& c, Summary& s) {
    const fs::path out = c.paths.out;
    s.add("preset", c.design.preset);
    s.add("seed", std::to_string(c.seed));
    if (c.design.preset == "illustrative") {
        const SurveyPanel p = illustrative_panel();
        emit(s, out / "panel.csv", render([&](std::ostream& os) { write_panel_csv(os, p); }));
        return;
    }
    if (c.design.preset == "vaccine") {
        const VaccineLikeData d = vaccine_like_data(c.seed);
        emit(s, out / "records.csv", render([&](std::ostream& os) { write_records_csv(os, d.records); }));
        emit(s, out / "benchmark.csv", render([&](std::ostream& os) { write_benchmark_csv(os, d.benchmark); }));
        emit(s, out / "true_rate.csv", render([&](std::ostream& os) {
                 os << "t,rate\n";
                 for (std::size_t i = 0; i < d.true_rate.size(); ++i) os << i + 1 << "," << fmt(d.true_rate[i]) << "\n";
             }));
        s.add("records", std::to_string(d.records.size()));
        return;
    }
    if (c.design.preset != "three-surveys")
        throw ConfigError("unknown preset '" + c.design.preset + "' (expected three-surveys, illustrative or vaccine)");
    GenDesign design = GenDesign::three_surveys(c.design.T, c.design.N, c.design.anchor_n, c.design.biased_n,
                                                c.design.bias, c.design.regime);
    design.monotone_walk = c.design.monotone_walk;
    design.truth_seed = derive_seed(c.seed, {0x5e1});
    try {
        design.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("design: ") + e.what());
    }
    Rng rng(design.truth_seed);
    const LatentState truth = draw_parameters(design, rng);
    const GeneratedPanel gen = generate_panel(truth, design, rng);
    emit(s, out / "panel.csv", render([&](std::ostream& os) { write_panel_csv(os, gen.panel); }));
    emit(s, out / "truth.json",
         render([&](std::ostream& os) { write_truth_json(os, TruthRecord{truth, gen.positives, gen.phi}); }));
    s.add("design", "K=3 T=" + std::to_string(design.T) + " N=" + std::to_string(design.N) + " bias=" +
                        std::string(to_string(design.bias[1])) + " regime=" + std::string(to_string(design.prior_regime)));
}

void run_fit(const RunConfig& c, Summary& s) {
    const SurveyPanel panel = select_surveys(c.model, load_panel(c.paths.panel));
    const ModelSpec spec = build_model_spec(c.model, panel);
    const FitResult fit = fit_full(panel, spec, c.sampler, c.alpha);
    const fs::path out = c.paths.out;
    emit(s, out / "summary.csv",
         render([&](std::ostream& os) { write_summary_csv(os, label_rows(fit.table, panel)); }));
    emit(s, out / "diagnostics.json",
         diagnostics_json(fit, panel, spec, c.sampler).dump(2) + "\n");
    s.add("panel", c.paths.panel);
    s.add("surveys", describe_spec(spec, panel));
    s.add("time_points", std::to_string(panel.time_points()));
    s.add("chains x draws", std::to_string(c.sampler.n_chains) + " x " +
                                std::to_string(c.sampler.n_draws / c.sampler.thin));
    s.add("converged", fit.table.converged ? "yes" : "no (some r_hat > 1.1)");
    s.add("saturated_cells", std::to_string(fit.saturated.size()));
    const SummaryRow& last = fit.table.rates.back();
    s.add("rate at T", fmt(last.median) + " [" + fmt(last.lower) + ", " + fmt(last.upper) + "]");
}

void run_nowcast(const RunConfig& c, Summary& s) {
    const SurveyPanel panel = select_surveys(c.model, load_panel(c.paths.panel));
    const ModelSpec spec = build_model_spec(c.model, panel);
    const auto points = nowcast_series(panel, spec, c.sampler, c.alpha);
    const fs::path out = c.paths.out;
    emit(s, out / "nowcast.csv", render([&](std::ostream& os) { write_nowcast_csv(os, points); }));
    emit(s, out / "summary.csv",
         render([&](std::ostream& os) { write_summary_csv(os, nowcast_table(points, c.alpha)); }));
    int failed = 0, unconverged = 0;
    for (const auto& p : points) {
        if (!p.error.empty()) ++failed;
        else if (!p.converged) ++unconverged;
    }
    s.add("panel", c.paths.panel);
    s.add("surveys", describe_spec(spec, panel));
    s.add("fits", std::to_string(points.size()));
    s.add("failed fits", std::to_string(failed));
    s.add("unconverged fits", std::to_string(unconverged));
}

void run_sim_study(const RunConfig& c, Summary& s) {
    const GridRun grid = run_grid(c.sim_study.Ts, c.sim_study.study);
    const fs::path out = c.paths.out;
    emit(s, out / "sim_results.csv", render([&](std::ostream& os) { write_sim_results_csv(os, grid.cells); }));
    emit(s, out / "sim_replications.csv",
         render([&](std::ostream& os) { write_replications_csv(os, grid.records); }));
    s.add("replications", std::to_string(c.sim_study.study.n_reps) + " per cell");
    s.add("cells", std::to_string(grid.cells.size()));
    int failures = 0;
    for (const auto& cell : grid.cells) failures += cell.failures;
    s.add("failed replications", std::to_string(failures));
}

void run_align(const RunConfig& c, Summary& s) {
    if (c.paths.records.empty()) throw ConfigError("no records given (use --records or paths.records)");
    if (c.paths.population <= 0) throw ConfigError("align needs a positive --population");
    std::istringstream in(read_text_file(c.paths.records));
    const auto records = read_records_csv(in);
    AlignedPanel aligned;
    try {
        aligned = align_dates(records, c.paths.benchmark_label, c.paths.population);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    const auto violations = validate_panel(aligned.panel);
    if (!violations.empty()) throw DataError("aligned panel is invalid: " + violations.front().rule);
    const fs::path out = c.paths.out;
    emit(s, out / "panel.csv", render([&](std::ostream& os) { write_panel_csv(os, aligned.panel); }));
    emit(s, out / "dates.csv", render([&](std::ostream& os) { write_dates_csv(os, aligned.dates); }));
    emit(s, out / "align_warnings.txt", render([&](std::ostream& os) {
             for (const auto& w : aligned.warnings) os << w << "\n";
         }));
    s.add("records", std::to_string(records.size()));
    s.add("time_points", std::to_string(aligned.panel.time_points()));
    s.add("observed cells", std::to_string(aligned.panel.observed_count()));
    s.add("dropped records", std::to_string(aligned.warnings.size()));
}

void run_report(const RunConfig& c, const Flags& f, Summary& s) {
    const SummaryTable baseline = load_summary(c.paths.baseline, "baseline");
    const SummaryTable method = load_summary(c.paths.method, "method");
    std::vector<int> include;
    if (!f.anchor_panel.empty()) {
        const SurveyPanel p = load_panel(f.anchor_panel);
        const std::string label = f.anchor_label.empty() ? p.label(0) : f.anchor_label;
        const int k = p.survey_index(label);
        if (k < 0) throw ConfigError("survey '" + label + "' is not in the panel");
        include = observed_times(p, k);
    }
    const RatioReport ratios = ci_width_ratio(baseline, method, include);
    const NiidReport niid = n_iid_gain(baseline, method, c.alpha, include);
    const fs::path out = c.paths.out;
    emit(s, out / "ratios.csv", render([&](std::ostream& os) { write_ratio_csv(os, ratios); }));
    emit(s, out / "niid.csv", render([&](std::ostream& os) { write_niid_csv(os, niid); }));
    json report = {{"ratio", {{"mean", ratios.mean}, {"median", ratios.median}, {"count", ratios.count},
                              {"flagged", ratios.flagged}}},
                   {"n_iid", {{"z", niid.z}, {"mean_gain", niid.mean_gain}, {"median_gain", niid.median_gain},
                              {"flagged", niid.flagged}}}};
    s.add("ratio mean/median", fmt(ratios.mean) + " / " + fmt(ratios.median) + " over " +
                                   std::to_string(ratios.count) + " time-points");
    s.add("n_iid gain mean/median", fmt(niid.mean_gain) + " / " + fmt(niid.median_gain));
    if (!c.paths.benchmark.empty()) {
        std::istringstream in(read_text_file(c.paths.benchmark));
        const BenchmarkSeries bench = read_benchmark_csv(in);
        const Coverage cov_m = coverage_vs_benchmark(method, bench);
        const Coverage cov_b = coverage_vs_benchmark(baseline, bench);
        emit(s, out / "coverage.csv", render([&](std::ostream& os) {
                 os << "table,hits,total,fraction\n";
                 os << "baseline," << cov_b.hits << "," << cov_b.total << "," << fmt(cov_b.fraction) << "\n";
                 os << "method," << cov_m.hits << "," << cov_m.total << "," << fmt(cov_m.fraction) << "\n";
             }));
        report["coverage"] = {{"baseline", {{"hits", cov_b.hits}, {"total", cov_b.total}}},
                              {"method", {{"hits", cov_m.hits}, {"total", cov_m.total}}}};
        s.add("coverage (method)", std::to_string(cov_m.hits) + "/" + std::to_string(cov_m.total));
    }
    emit(s, out / "report.json", report.dump(2) + "\n");
}

void fail(std::ostream& err, ExitCode code, const char* category, const std::string& message) {
    err << json{{"error", {{"category", category}, {"code", static_cast<int>(code)}, {"message", message}}}}.dump()
        << "\n";
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian synthesis of biased and unbiased surveys"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON run configuration");
        sub->add_option("--seed", f.seed, "master seed");
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--scale", f.scale, "desk or full sampler defaults");
        sub->add_option("--bias", f.bias, "KIND for all biased surveys, or SURVEY=KIND")->take_all();
        sub->add_flag("--exact-nchg", f.exact_nchg, "exact hypergeometric likelihood");
        sub->add_flag("--monotone", f.monotone, "non-decreasing latent walk");
        sub->add_option("--alpha", f.alpha, "credible level is 1 - alpha");
    };
    auto fit_inputs = [&](CLI::App* sub) {
        sub->add_option("--panel", f.panel, "panel CSV");
        sub->add_option("--anchor", f.anchors, "anchor survey label (repeatable)")->take_all();
        sub->add_option("--surveys", f.surveys, "fit only these surveys")->delimiter(',');
    };

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic panel");
    common(simulate);
    simulate->add_option("--preset", f.preset, "three-surveys, illustrative or vaccine");
    simulate->add_option("--T", f.T, "time-points");
    simulate->add_option("--regime", f.regime, "default or narrowed priors");

    auto* fit = app.add_subcommand("fit", "full-data posterior");
    common(fit);
    fit_inputs(fit);

    auto* nowcast = app.add_subcommand("nowcast", "posterior at each t using data up to t");
    common(nowcast);
    fit_inputs(nowcast);

    auto* sim = app.add_subcommand("sim-study", "simulation grid of truth x fitted bias models");
    common(sim);
    sim->add_option("--T", f.Ts, "time-point counts")->delimiter(',');
    sim->add_option("--reps", f.reps, "replications per cell");
    sim->add_option("--regime", f.regime, "default or narrowed priors");

    auto* align = app.add_subcommand("align", "dated records to a panel on the benchmark survey's dates");
    common(align);
    align->add_option("--records", f.records, "records CSV");
    align->add_option("--benchmark-label", f.benchmark_label, "survey whose dates define the grid");
    align->add_option("--population", f.population, "population size N");

    auto* report = app.add_subcommand("report", "interval ratios, coverage and n_iid from stored summaries");
    common(report);
    report->add_option("--baseline", f.baseline, "baseline summary CSV");
    report->add_option("--method", f.method, "method summary CSV");
    report->add_option("--benchmark", f.benchmark, "benchmark CSV");
    report->add_option("--anchor-panel", f.anchor_panel, "panel whose anchor observations select time-points");
    report->add_option("--anchor-label", f.anchor_label, "anchor survey in --anchor-panel");

    std::vector<std::string> reversed;
    for (std::size_t i = args.size(); i > 1; --i) reversed.push_back(args[i - 1]);
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        fail(err, ExitCode::usage, "usage", e.what());
        return static_cast<int>(ExitCode::usage);
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    const auto start = std::chrono::steady_clock::now();
    try {
        configure_workers();
        const RunConfig c = resolve_config(f);
        Summary s(command);
        if (command == "simulate") run_simulate(c, s);
        else if (command == "fit") run_fit(c, s);
        else if (command == "nowcast") run_nowcast(c, s);
        else if (command == "sim-study") run_sim_study(c, s);
        else if (command == "align") run_align(c, s);
        else run_report(c, f, s);
        s.print(out, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        return 0;
    } catch (const ConfigError& e) {
        fail(err, ExitCode::config, "config", e.what());
        return static_cast<int>(ExitCode::config);
    } catch (const IoError& e) {
        fail(err, ExitCode::io, "io", e.what());
        return static_cast<int>(ExitCode::io);
    } catch (const fs::filesystem_error& e) {
        fail(err, ExitCode::io, "io", e.what());
        return static_cast<int>(ExitCode::io);
    } catch (const ParseError& e) {
        fail(err, ExitCode::data, "data", e.what());
        return static_cast<int>(ExitCode::data);
    } catch (const DataError& e) {
        fail(err, ExitCode::data, "data", e.what());
        return static_cast<int>(ExitCode::data);
    } catch (const SamplerError& e) {
        fail(err, ExitCode::sampler, "sampler", e.what());
        return static_cast<int>(ExitCode::sampler);
    } catch (const std::invalid_argument& e) {
        fail(err, ExitCode::data, "data", e.what());
        return static_cast<int>(ExitCode::data);
    } catch (const std::exception& e) {
        fail(err, ExitCode::internal, "internal", e.what());
        return static_cast<int>(ExitCode::internal);
    }
}

} // namespace surveysynth
