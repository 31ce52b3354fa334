#include <benchmark/benchmark.h>

#include <vector>

#include "surveysynth/datagen.hpp"
#include "surveysynth/likelihood.hpp"
#include "surveysynth/mcmc.hpp"
#include "surveysynth/simstudy.hpp"

using namespace surveysynth;

namespace {

struct WideProblem {
    SurveyPanel panel;
    ModelSpec spec;
    LatentState state;
};

// 48 time-points, 12 surveys, exact likelihood so each cell is costly.
WideProblem wide_problem(bool exact) {
    GenDesign d;
    d.K = 12;
    d.T = 48;
    d.N = 100000;
    for (int k = 0; k < d.K; ++k) {
        d.n_plan.push_back(std::vector<Count>(d.T, k == 0 ? 500 : 2000));
        d.bias.push_back(k == 0 ? BiasKind::known : BiasKind::walk);
        d.labels.push_back("S" + std::to_string(k));
    }
    d.prior_regime = PriorRegime::narrowed;
    Rng rng(7);
    WideProblem p;
    p.state = draw_parameters(d, rng);
    p.panel = generate_panel(p.state, d, rng).panel;
    p.spec = d.model_spec();
    p.spec.use_exact_nchg = exact;
    return p;
}

void likelihood_terms(benchmark::State& st, Exec exec, bool exact) {
    const WideProblem p = wide_problem(exact);
    std::vector<double> out(static_cast<std::size_t>(p.panel.surveys()) * p.panel.time_points());
    for (auto _ : st) {
        cell_log_lik_terms(p.state, p.panel, p.spec, out, exec);
        benchmark::DoNotOptimize(out.data());
    }
}

void chains(benchmark::State& st, Exec exec) {
    const SurveyPanel panel = illustrative_panel();
    ModelSpec spec;
    spec.bias = {{BiasKind::known, {}}, {BiasKind::walk, {}}, {BiasKind::walk, {}}};
    SamplerSettings s;
    s.n_chains = 4;
    s.burn_in = 500;
    s.n_draws = 1000;
    s.thin = 5;
    for (auto _ : st) benchmark::DoNotOptimize(run_chains(panel, spec, s, exec).draws.draws_per_chain());
}

void sim_cell(benchmark::State& st, Exec exec) {
    SimStudyConfig c = SimStudyConfig::desk();
    c.n_reps = 8;
    for (auto _ : st) benchmark::DoNotOptimize(run_cell(BiasKind::walk, FitKind::walk, 5, c, exec).result.mse);
}

} // namespace

BENCHMARK_CAPTURE(likelihood_terms, binomial_serial, Exec::serial, false)->UseRealTime();
BENCHMARK_CAPTURE(likelihood_terms, binomial_parallel, Exec::parallel, false)->UseRealTime();
BENCHMARK_CAPTURE(likelihood_terms, exact_serial, Exec::serial, true)->UseRealTime();
BENCHMARK_CAPTURE(likelihood_terms, exact_parallel, Exec::parallel, true)->UseRealTime();
BENCHMARK_CAPTURE(chains, serial, Exec::serial)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(chains, parallel, Exec::parallel)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sim_cell, serial, Exec::serial)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sim_cell, parallel, Exec::parallel)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
