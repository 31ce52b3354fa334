#include "surveysynth/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace surveysynth {

namespace {

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x, double mean) {
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return s / static_cast<double>(x.size() - 1);
}

void check_chains(const std::vector<std::vector<double>>& chains, std::size_t min_length) {
    if (chains.empty()) throw std::invalid_argument("diagnostics need at least one chain");
    const std::size_t len = chains.front().size();
    for (const auto& c : chains)
        if (c.size() != len) throw std::invalid_argument("chains must have equal length");
    if (len < min_length) throw std::invalid_argument("chains too short for diagnostics");
}

// Autocorrelation sums stop here; beyond it the estimate is a bound.
constexpr std::size_t kMaxLag = 500;

} // namespace

double r_hat(const std::vector<std::vector<double>>& chains) {
    check_chains(chains, 4);
    const std::size_t half = chains.front().size() / 2;
    std::vector<std::span<const double>> pieces;
    for (const auto& c : chains) {
        pieces.emplace_back(c.data(), half);
        pieces.emplace_back(c.data() + (c.size() - half), half);
    }
    const auto m = static_cast<double>(pieces.size());
    const auto n = static_cast<double>(half);
    std::vector<double> means;
    double w = 0.0;
    for (auto p : pieces) {
        const double mu = mean_of(p);
        means.push_back(mu);
        w += variance_of(p, mu);
    }
    w /= m;
    const double grand = mean_of(means);
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= n / (m - 1.0);
    if (w <= 0.0) return b <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double var_plus = (n - 1.0) / n * w + b / n;
    return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
    check_chains(chains, 4);
    const std::size_t n = chains.front().size();
    const auto m = static_cast<double>(chains.size());
    const auto nd = static_cast<double>(n);

    std::vector<double> means;
    std::vector<double> vars;
    for (const auto& c : chains) {
        const double mu = mean_of(c);
        means.push_back(mu);
        vars.push_back(variance_of(c, mu));
    }
    const double w = mean_of(vars);
    double var_plus = w * (nd - 1.0) / nd;
    if (chains.size() > 1) var_plus += variance_of(means, mean_of(means));
    if (!(var_plus > 0.0)) return m * nd;

    // Mean autocovariance across chains at a given lag (biased estimator).
    auto acov = [&](std::size_t lag) {
        double total = 0.0;
        for (std::size_t j = 0; j < chains.size(); ++j) {
            const auto& c = chains[j];
            double s = 0.0;
            for (std::size_t i = 0; i + lag < n; ++i) s += (c[i] - means[j]) * (c[i + lag] - means[j]);
            total += s / nd;
        }
        return total / m;
    };
    auto rho = [&](std::size_t lag) { return 1.0 - (w - acov(lag)) / var_plus; };

    double tau = -1.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    const std::size_t max_lag = std::min<std::size_t>(n - 1, kMaxLag);
    for (std::size_t lag = 0; lag + 1 <= max_lag; lag += 2) {
        double pair = rho(lag) + rho(lag + 1);
        if (pair < 0.0) break;
        pair = std::min(pair, prev_pair);
        prev_pair = pair;
        tau += 2.0 * pair;
    }
    tau = std::max(tau, 1.0 / std::log10(m * nd + 10.0));
    return m * nd / tau;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile probability outside [0,1]");
    const double h = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace surveysynth
