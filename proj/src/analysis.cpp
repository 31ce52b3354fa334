#include "surveysynth/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <stdexcept>

#include "surveysynth/dists.hpp"

namespace surveysynth {

namespace {

std::string iso(std::chrono::sys_days d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::vector<int> times_or_all(const std::vector<int>& include, const SummaryTable& table) {
    if (!include.empty()) return include;
    std::vector<int> out;
    for (const auto& r : table.rates) out.push_back(r.t);
    return out;
}

} // namespace

AlignedPanel align_dates(const std::vector<DatedRecord>& records, const std::string& benchmark_label,
                         Count population) {
    std::vector<std::string> labels;
    for (const auto& r : records)
        if (std::find(labels.begin(), labels.end(), r.survey) == labels.end()) labels.push_back(r.survey);

    AlignedPanel out;
    std::vector<const DatedRecord*> bench;
    for (const auto& r : records)
        if (r.survey == benchmark_label) bench.push_back(&r);
    if (bench.empty()) throw std::invalid_argument("benchmark survey '" + benchmark_label + "' has no records");
    std::stable_sort(bench.begin(), bench.end(), [](auto* a, auto* b) { return a->date < b->date; });
    for (std::size_t i = 1; i < bench.size(); ++i)
        if (bench[i]->date == bench[i - 1]->date)
            throw std::invalid_argument("duplicate benchmark date " + iso(bench[i]->date));
    for (auto* b : bench) out.dates.push_back(b->date);

    const int T = static_cast<int>(bench.size());
    out.panel = SurveyPanel(population, labels, T);
    std::map<std::pair<int, int>, const DatedRecord*> chosen;
    for (const auto& r : records) {
        const int k = out.panel.survey_index(r.survey);
        int t = 0;
        if (r.survey == benchmark_label) {
            t = static_cast<int>(std::lower_bound(out.dates.begin(), out.dates.end(), r.date) - out.dates.begin()) + 1;
        } else {
            // Latest benchmark date not after the record.
            auto it = std::upper_bound(out.dates.begin(), out.dates.end(), r.date);
            if (it == out.dates.begin() || (r.date - *(it - 1)).count() > kAlignWindowDays) {
                out.warnings.push_back("dropped " + r.survey + " record dated " + iso(r.date) +
                                       ": no benchmark date within " + std::to_string(kAlignWindowDays) + " days");
                continue;
            }
            t = static_cast<int>(it - out.dates.begin());
        }
        auto [slot, inserted] = chosen.emplace(std::pair{k, t}, &r);
        if (!inserted) {
            const DatedRecord* keep = slot->second;
            const DatedRecord* drop = &r;
            if (r.date < keep->date) std::swap(keep, drop);
            slot->second = keep;
            out.warnings.push_back("dropped " + drop->survey + " record dated " + iso(drop->date) +
                                   ": earlier record already fills time-point " + std::to_string(t));
        }
    }
    for (const auto& [key, rec] : chosen) out.panel.set(key.first, key.second, rec->y, rec->n);
    return out;
}

std::vector<DatedRecord> panel_records(const AlignedPanel& aligned) {
    std::vector<DatedRecord> out;
    const SurveyPanel& p = aligned.panel;
    for (int k = 0; k < p.surveys(); ++k)
        for (int t = 1; t <= p.time_points(); ++t) {
            const Cell& c = p.cell(k, t);
            if (c.observed()) out.push_back({p.label(k), aligned.dates.at(t - 1), *c.y, *c.n});
        }
    return out;
}

ModelSpec vaccine_model_spec(const SurveyPanel& panel, const std::string& anchor_label, BiasKind biased) {
    if (panel.survey_index(anchor_label) < 0) throw std::invalid_argument("anchor survey '" + anchor_label + "' not in panel");
    ModelSpec spec;
    spec.priors.nu0 = -2.0;
    spec.priors.Gamma0_sq = 1.0;
    spec.monotone_walk = true;
    for (int k = 0; k < panel.surveys(); ++k)
        spec.bias.push_back({panel.label(k) == anchor_label ? BiasKind::known : biased, {}});
    return spec;
}

FitResult fit_full(const SurveyPanel& panel, const ModelSpec& spec, const SamplerSettings& settings, double alpha,
                   Exec exec) {
    if (panel.observed_count() == 0) throw std::invalid_argument("no observed cells");
    const ChainRun run = run_chains(panel, spec, settings, exec);
    FitResult out;
    out.table = summarize(run.draws, spec, alpha);
    out.table.converged = out.table.converged && run.diagnostics.converged;
    out.diagnostics = run.diagnostics;
    out.acceptance = run.draws.acceptance_rates;
    out.saturated = detect_saturated_cells(panel, spec);
    return out;
}

std::vector<NowcastPoint> nowcast_series(const SurveyPanel& panel, const ModelSpec& spec,
                                         const SamplerSettings& settings, double alpha, Exec exec) {
    const int T = panel.time_points();
    spec.validate(panel.surveys(), T);
    std::vector<NowcastPoint> out(T);
    auto body = [&](int i) {
        const int t_star = i + 1;
        NowcastPoint& pt = out[i];
        pt.t = t_star;
        try {
            const SurveyPanel sub = panel.truncated(t_star);
            if (sub.observed_count() == 0) throw std::invalid_argument("no observed cells");
            ModelSpec sub_spec = spec;
            for (auto& b : sub_spec.bias)
                if (!b.fixed_phi.empty()) b.fixed_phi.resize(t_star);
            SamplerSettings s = settings;
            s.seed = derive_seed(settings.seed, {0x40c, static_cast<std::uint64_t>(t_star)});
            const ChainRun run = run_chains(sub, sub_spec, s, Exec::serial);
            const SummaryTable table = summarize(run.draws, sub_spec, alpha);
            pt.rate = *table.rate_at(t_star);
            if (const auto* r = table.find("sigma_sq")) pt.sigma_sq = *r;
            if (const auto* r = table.find("pi_sq")) pt.pi_sq = *r;
            pt.converged = table.converged && run.diagnostics.converged;
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (int i = T - 1; i >= 0; --i) body(i);
    } else {
        for (int i = 0; i < T; ++i) body(i);
    }
    return out;
}

SummaryTable nowcast_table(const std::vector<NowcastPoint>& points, double alpha) {
    SummaryTable table;
    table.alpha = alpha;
    for (const auto& p : points) {
        if (!p.rate) continue;
        table.rates.push_back(*p.rate);
        if (p.sigma_sq) {
            table.parameters.push_back(*p.sigma_sq);
            table.parameters.back().t = p.t;
        }
        if (p.pi_sq) {
            table.parameters.push_back(*p.pi_sq);
            table.parameters.back().t = p.t;
        }
        table.converged = table.converged && p.converged;
    }
    return table;
}

RatioReport ci_width_ratio(const SummaryTable& baseline, const SummaryTable& method, const std::vector<int>& include) {
    RatioReport out;
    int T = 0;
    for (const auto& r : baseline.rates) T = std::max(T, r.t);
    for (const auto& r : method.rates) T = std::max(T, r.t);
    out.ratio.assign(T, std::nullopt);
    std::vector<double> values;
    for (int t : times_or_all(include, baseline)) {
        const SummaryRow* b = baseline.rate_at(t);
        const SummaryRow* m = method.rate_at(t);
        if (!b || !m) continue;
        if (!(m->width() > 0.0)) {
            out.flagged.push_back(t);
            continue;
        }
        const double ratio = b->width() / m->width();
        out.ratio[t - 1] = ratio;
        values.push_back(ratio);
    }
    out.count = static_cast<int>(values.size());
    out.mean = mean_of(values);
    out.median = median_of(values);
    return out;
}

Coverage coverage_vs_benchmark(const SummaryTable& method, const BenchmarkSeries& bench) {
    Coverage c;
    for (const auto& row : method.rates) {
        const BenchmarkPoint* b = bench.at(row.t);
        if (!b) continue;
        ++c.total;
        if (row.lower <= b->rate + b->margin && row.upper >= b->rate - b->margin) ++c.hits;
    }
    c.fraction = c.total ? static_cast<double>(c.hits) / c.total : 0.0;
    return c;
}

double n_iid(double z, double p_hat, double moe) { return z * z * p_hat * (1.0 - p_hat) / (moe * moe); }

NiidReport n_iid_gain(const SummaryTable& baseline, const SummaryTable& method, double alpha,
                      const std::vector<int>& include) {
    NiidReport out;
    out.z = normal_quantile(1.0 - alpha / 2.0);
    std::vector<double> gains;
    for (int t : times_or_all(include, baseline)) {
        const SummaryRow* b = baseline.rate_at(t);
        const SummaryRow* m = method.rate_at(t);
        if (!b || !m) continue;
        NiidRow row;
        row.t = t;
        row.p_hat_baseline = b->median;
        row.p_hat_method = m->median;
        row.moe_baseline = 0.5 * b->width();
        row.moe_method = 0.5 * m->width();
        row.ratio = m->width() > 0.0 ? b->width() / m->width() : std::numeric_limits<double>::quiet_NaN();
        auto defined = [](double p, double moe) { return p > 0.0 && p < 1.0 && moe > 0.0; };
        if (defined(row.p_hat_baseline, row.moe_baseline))
            row.n_iid_baseline = n_iid(out.z, row.p_hat_baseline, row.moe_baseline);
        if (defined(row.p_hat_method, row.moe_method)) {
            row.n_iid_method = n_iid(out.z, row.p_hat_method, row.moe_method);
            const double r = m->width() / b->width();
            row.literal = out.z * out.z * row.p_hat_method * (1.0 - row.p_hat_method) / (r * row.moe_baseline);
        }
        if (row.n_iid_baseline && row.n_iid_method) {
            row.gain = *row.n_iid_method - *row.n_iid_baseline;
            gains.push_back(*row.gain);
        } else {
            out.flagged.push_back(t);
        }
        out.rows.push_back(row);
    }
    out.mean_gain = mean_of(gains);
    out.median_gain = median_of(gains);
    return out;
}

std::vector<int> observed_times(const SurveyPanel& panel, int k) {
    std::vector<int> out;
    for (int t = 1; t <= panel.time_points(); ++t)
        if (panel.cell(k, t).observed()) out.push_back(t);
    return out;
}

} // namespace surveysynth
