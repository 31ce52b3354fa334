#include "surveysynth/simstudy.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

#include "surveysynth/dists.hpp"
#include "surveysynth/mcmc.hpp"

namespace surveysynth {

std::string_view to_string(FitKind kind) {
    switch (kind) {
    case FitKind::unbiased_only: return "unbiased-only";
    case FitKind::constant: return "constant";
    case FitKind::linear: return "linear";
    case FitKind::walk: return "walk";
    }
    return "?";
}

FitKind parse_fit_kind(std::string_view text) {
    if (text == "unbiased-only") return FitKind::unbiased_only;
    if (text == "constant") return FitKind::constant;
    if (text == "linear") return FitKind::linear;
    if (text == "walk") return FitKind::walk;
    throw std::invalid_argument("unknown fit kind '" + std::string(text) + "'");
}

SimStudyConfig SimStudyConfig::desk() {
    SimStudyConfig c;
    c.n_reps = 100;
    c.sampler.n_chains = 2;
    c.sampler.burn_in = 1500;
    c.sampler.n_draws = 3000;
    c.sampler.thin = 3;
    return c;
}

SimStudyConfig SimStudyConfig::full() {
    SimStudyConfig c;
    c.n_reps = 2000;
    c.sampler = SamplerSettings::full();
    return c;
}

CellResult aggregate(BiasKind truth, FitKind fit, int T, const std::vector<ReplicationRecord>& records) {
    CellResult r;
    r.truth = truth;
    r.fit = fit;
    r.T = T;
    r.n_reps = static_cast<int>(records.size());
    double sum = 0.0;
    for (const auto& rec : records) {
        if (rec.failed) {
            ++r.failures;
            continue;
        }
        ++r.n_used;
        sum += rec.sq_error;
    }
    if (r.n_used == 0) {
        r.mse = std::numeric_limits<double>::quiet_NaN();
        r.ci_lo = r.ci_hi = r.mse;
        return r;
    }
    r.mse = sum / r.n_used;
    if (r.n_used >= 2) {
        double ss = 0.0;
        for (const auto& rec : records)
            if (!rec.failed) ss += (rec.sq_error - r.mse) * (rec.sq_error - r.mse);
        r.mcse = std::sqrt(ss / (r.n_used - 1)) / std::sqrt(static_cast<double>(r.n_used));
    }
    const double half = r.mcse ? 1.96 * *r.mcse : 0.0;
    r.ci_lo = r.mse - half;
    r.ci_hi = r.mse + half;
    return r;
}

GenDesign sim_design(BiasKind truth, int T, const SimStudyConfig& config) {
    return GenDesign::three_surveys(T, config.N, config.anchor_n, config.biased_n, truth, config.regime);
}

ModelSpec sim_fit_spec(FitKind fit, const SimStudyConfig& config) {
    ModelSpec spec;
    spec.priors = config.regime == PriorRegime::narrowed ? PriorSpec::narrowed() : PriorSpec{};
    spec.center_time = true;
    spec.bias.push_back({BiasKind::known, {}});
    if (fit != FitKind::unbiased_only) {
        const BiasKind kind = fit == FitKind::constant ? BiasKind::constant
                              : fit == FitKind::linear ? BiasKind::linear
                                                       : BiasKind::walk;
        spec.bias.push_back({kind, {}});
        spec.bias.push_back({kind, {}});
    }
    return spec;
}

ReplicationRecord run_replication(BiasKind truth, FitKind fit, int T, int rep, const SimStudyConfig& config) {
    ReplicationRecord rec;
    rec.truth = truth;
    rec.fit = fit;
    rec.T = T;
    rec.rep = rep;

    const auto truth_index = static_cast<std::uint64_t>(truth);
    const auto fit_index = static_cast<std::uint64_t>(fit);
    GenDesign design = sim_design(truth, T, config);
    design.truth_seed = derive_seed(config.seed, {truth_index, static_cast<std::uint64_t>(T),
                                                  static_cast<std::uint64_t>(rep)});
    Rng rng(design.truth_seed);
    const LatentState state = draw_parameters(design, rng);
    const GeneratedPanel gen = generate_panel(state, design, rng);
    rec.panel_hash = panel_hash(gen.panel);
    rec.truth_rate = inv_logit(state.theta[T]);

    const SurveyPanel fit_panel = fit == FitKind::unbiased_only ? gen.panel.subset({0}) : gen.panel;
    SamplerSettings settings = config.sampler;
    settings.seed = derive_seed(config.seed, {truth_index, static_cast<std::uint64_t>(T),
                                              static_cast<std::uint64_t>(rep), 0xf17, fit_index});
    try {
        const ChainRun run = run_chains(fit_panel, sim_fit_spec(fit, config), settings, Exec::serial);
        const SummaryTable table = summarize(run.draws, sim_fit_spec(fit, config), 0.05);
        const SummaryRow& last = *table.rate_at(T);
        rec.estimate = last.median;
        rec.sq_error = (rec.estimate - rec.truth_rate) * (rec.estimate - rec.truth_rate);
        rec.r_hat = last.r_hat;
        if (std::isfinite(rec.r_hat) && rec.r_hat > kRhatThreshold) {
            rec.failed = true;
            rec.note = "r_hat above threshold";
        }
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.note = e.what();
    }
    return rec;
}

CellRun run_cell(BiasKind truth, FitKind fit, int T, const SimStudyConfig& config, Exec exec) {
    CellRun out;
    out.records.resize(config.n_reps);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (int rep = 0; rep < config.n_reps; ++rep) out.records[rep] = run_replication(truth, fit, T, rep, config);
    } else {
        for (int rep = 0; rep < config.n_reps; ++rep) out.records[rep] = run_replication(truth, fit, T, rep, config);
    }
    out.result = aggregate(truth, fit, T, out.records);
    return out;
}

GridRun run_grid(const std::vector<int>& Ts, const SimStudyConfig& config, Exec exec) {
    struct Job {
        BiasKind truth;
        FitKind fit;
        int T;
    };
    const BiasKind truths[] = {BiasKind::constant, BiasKind::linear, BiasKind::walk};
    const FitKind fits[] = {FitKind::unbiased_only, FitKind::constant, FitKind::linear, FitKind::walk};
    std::vector<Job> cells;
    for (int T : Ts)
        for (BiasKind truth : truths)
            for (FitKind fit : fits) cells.push_back({truth, fit, T});

    const long n_reps = config.n_reps;
    const long total = static_cast<long>(cells.size()) * n_reps;
    std::vector<ReplicationRecord> records(total);
    auto body = [&](long i) {
        const Job& job = cells[i / n_reps];
        records[i] = run_replication(job.truth, job.fit, job.T, static_cast<int>(i % n_reps), config);
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long i = 0; i < total; ++i) body(i);
    } else {
        for (long i = 0; i < total; ++i) body(i);
    }

    GridRun out;
    out.records = std::move(records);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<ReplicationRecord> slice(out.records.begin() + static_cast<long>(c) * n_reps,
                                             out.records.begin() + static_cast<long>(c + 1) * n_reps);
        out.cells.push_back(aggregate(cells[c].truth, cells[c].fit, cells[c].T, slice));
    }
    return out;
}

} // namespace surveysynth
