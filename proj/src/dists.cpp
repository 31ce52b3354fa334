#include "surveysynth/dists.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace surveysynth {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// log of the upper tail Q(z) = P(Z > z), usable far into the tail.
double log_upper_tail(double z) {
    if (z < 30.0) return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
    // Mills ratio expansion.
    const double z2 = z * z;
    return -0.5 * z2 - std::log(z) - kLogSqrt2Pi + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

// log(P(a < Z < b)) for standardised bounds.
double log_normal_mass(double a, double b) {
    if (a >= 0.0) {
        const double la = log_upper_tail(a);
        if (std::isinf(b)) return la;
        const double lb = log_upper_tail(b);
        return la + std::log1p(-std::exp(lb - la));
    }
    if (b <= 0.0) return log_normal_mass(-b, -a);
    const double lower = std::isinf(a) ? 0.0 : 0.5 * std::erfc(-a / std::numbers::sqrt2);
    const double upper = std::isinf(b) ? 0.0 : 0.5 * std::erfc(b / std::numbers::sqrt2);
    return std::log1p(-(lower + upper));
}

void check_unit_interval(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error(std::string(what) + ": probability outside (0,1)");
}

// Draw from the standard normal restricted to [a, inf), a > 0 (Robert 1995).
double tail_exponential(double a, double b, Rng& rng) {
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
        const double z = a - std::log(uniform01(rng)) / alpha;
        if (z > b) continue;
        const double d = z - alpha;
        if (uniform01(rng) <= std::exp(-0.5 * d * d)) return z;
    }
}

// Uniform proposal on [a, b] against the normal density.
double bounded_uniform(double a, double b, Rng& rng) {
    // Peak of the standard normal density inside [a, b].
    const double peak = (a > 0.0) ? a : (b < 0.0 ? b : 0.0);
    for (;;) {
        const double z = a + (b - a) * uniform01(rng);
        if (uniform01(rng) <= std::exp(0.5 * (peak * peak - z * z))) return z;
    }
}

double standard_truncated(double a, double b, Rng& rng) {
    if (a > 0.0) {
        if (b - a < 0.5) return bounded_uniform(a, b, rng);
        if (a < 0.3) {
            // Plenty of mass: plain rejection is cheaper.
            for (;;) {
                const double z = std_normal(rng);
                if (z >= a && z <= b) return z;
            }
        }
        return tail_exponential(a, b, rng);
    }
    if (b < 0.0) return -standard_truncated(-b, -a, rng);
    if (b - a < 2.5) return bounded_uniform(a, b, rng);
    for (;;) {
        const double z = std_normal(rng);
        if (z >= a && z <= b) return z;
    }
}

} // namespace

double logit(double p) {
    check_unit_interval(p, "logit");
    return std::log(p) - std::log1p(-p);
}

double inv_logit(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_inv_logit(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double log1m_inv_logit(double x) { return log_inv_logit(-x); }

double log_gamma(double x) { return boost::math::lgamma(x); }

double log_choose(Count n, Count k) {
    if (k < 0 || k > n) return -kInf;
    if (k == 0 || k == n) return 0.0;
    return log_gamma(static_cast<double>(n) + 1.0) - log_gamma(static_cast<double>(k) + 1.0) -
           log_gamma(static_cast<double>(n - k) + 1.0);
}

double normal_logpdf(double x, double mean, double var) {
    const double d = x - mean;
    return -kLogSqrt2Pi - 0.5 * std::log(var) - 0.5 * d * d / var;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
    check_unit_interval(p, "normal_quantile");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double truncnorm_logpdf(double x, double mean, double var, double lower, double upper) {
    if (!(var > 0.0)) throw std::domain_error("truncnorm_logpdf: variance must be positive");
    if (!(lower < upper)) throw std::domain_error("truncnorm_logpdf: empty interval");
    if (x < lower || x > upper) return -kInf;
    const double sd = std::sqrt(var);
    double log_mass = 0.0;
    if (!(std::isinf(lower) && std::isinf(upper))) {
        // A bound at the mean is the common half-normal case.
        if (lower == mean && std::isinf(upper))
            log_mass = -std::numbers::ln2;
        else
            log_mass = log_normal_mass((lower - mean) / sd, (upper - mean) / sd);
    }
    return normal_logpdf(x, mean, var) - log_mass;
}

double truncnorm_sample(double mean, double var, double lower, double upper, Rng& rng) {
    if (!(var > 0.0)) throw std::domain_error("truncnorm_sample: variance must be positive");
    if (!(lower < upper)) throw std::domain_error("truncnorm_sample: empty interval");
    const double sd = std::sqrt(var);
    if (std::isinf(lower) && std::isinf(upper)) return mean + sd * std_normal(rng);
    return mean + sd * standard_truncated((lower - mean) / sd, (upper - mean) / sd, rng);
}

double truncnorm_mean(double mean, double var, double lower, double upper) {
    const double sd = std::sqrt(var);
    const double a = (lower - mean) / sd;
    const double b = (upper - mean) / sd;
    auto density = [](double z) { return std::isinf(z) ? 0.0 : std::exp(-0.5 * z * z - kLogSqrt2Pi); };
    const double mass = std::exp(log_normal_mass(a, b));
    return mean + sd * (density(a) - density(b)) / mass;
}

void NchgParams::validate() const {
    if (m1 < 0 || m2 < 0) throw std::domain_error("nchg: negative class count");
    if (n < 0 || n > m1 + m2) throw std::domain_error("nchg: sample size outside [0, m1+m2]");
    if (!(phi > 0.0) || !std::isfinite(phi)) throw std::domain_error("nchg: odds ratio must be positive");
}

namespace {

// f(y+1) / f(y) for the unnormalised pmf.
inline double nchg_ratio_up(Count y, const NchgParams& p) {
    return p.phi * static_cast<double>(p.m1 - y) * static_cast<double>(p.n - y) /
           (static_cast<double>(y + 1) * static_cast<double>(p.m2 - p.n + y + 1));
}

// log f(y) - log f(mode) via log-gamma differences.
double nchg_log_weight(Count y, Count mode, const NchgParams& p) {
    return log_choose(p.m1, y) - log_choose(p.m1, mode) + log_choose(p.m2, p.n - y) -
           log_choose(p.m2, p.n - mode) + static_cast<double>(y - mode) * std::log(p.phi);
}

constexpr double kTailCut = 1e-18;

// Weights relative to the mode over the numerically relevant range, built
// outward from the mode with the ratio recurrence.
struct ModeWeights {
    Count lo = 0;
    Count mode = 0;
    std::vector<double> w; // w[i] is the weight of y = lo + i
    double total = 0.0;
};

ModeWeights nchg_mode_weights(const NchgParams& p) {
    const Count ymin = p.support_min();
    const Count ymax = p.support_max();
    const Count mode = nchg_mode(p);
    std::vector<double> down;
    std::vector<double> up;
    double total = 1.0;
    double w = 1.0;
    for (Count y = mode; y > ymin; --y) {
        w /= nchg_ratio_up(y - 1, p);
        if (w < kTailCut * total) break;
        down.push_back(w);
        total += w;
    }
    w = 1.0;
    for (Count y = mode; y < ymax; ++y) {
        w *= nchg_ratio_up(y, p);
        if (w < kTailCut * total) break;
        up.push_back(w);
        total += w;
    }
    ModeWeights out;
    out.mode = mode;
    out.lo = mode - static_cast<Count>(down.size());
    out.w.assign(down.rbegin(), down.rend());
    out.w.push_back(1.0);
    out.w.insert(out.w.end(), up.begin(), up.end());
    // Re-sum in ascending order so the total is independent of build order.
    out.total = 0.0;
    for (double v : out.w) out.total += v;
    return out;
}

} // namespace

Count nchg_mode(const NchgParams& p) {
    p.validate();
    const Count ymin = p.support_min();
    const Count ymax = p.support_max();
    if (ymin == ymax) return ymin;
    const double share = static_cast<double>(p.m1) / static_cast<double>(p.m1 + p.m2);
    double q = share;
    if (share > 0.0 && share < 1.0) q = biased_success_prob(share, p.phi);
    Count y = std::clamp(static_cast<Count>(std::floor(q * static_cast<double>(p.n))), ymin, ymax);
    while (y < ymax && nchg_ratio_up(y, p) > 1.0) ++y;
    while (y > ymin && nchg_ratio_up(y - 1, p) < 1.0) --y;
    // Ties resolve to the lower outcome.
    while (y > ymin && nchg_ratio_up(y - 1, p) == 1.0) --y;
    return y;
}

double nchg_logpmf(Count y, const NchgParams& p) {
    p.validate();
    if (y < p.support_min() || y > p.support_max()) return -kInf;
    if (p.phi == 1.0)
        return log_choose(p.m1, y) + log_choose(p.m2, p.n - y) - log_choose(p.m1 + p.m2, p.n);
    const ModeWeights mw = nchg_mode_weights(p);
    const Count i = y - mw.lo;
    if (i >= 0 && i < static_cast<Count>(mw.w.size())) return std::log(mw.w[i]) - std::log(mw.total);
    return nchg_log_weight(y, mw.mode, p) - std::log(mw.total);
}

double hypergeometric_logpmf(Count y, Count m1, Count m2, Count n) {
    return nchg_logpmf(y, NchgParams{m1, m2, n, 1.0});
}

Count nchg_sample(const NchgParams& p, Rng& rng) {
    p.validate();
    if (p.support_min() == p.support_max()) return p.support_min();
    const ModeWeights mw = nchg_mode_weights(p);
    // Chop-down inversion starting at the mode, alternating outward.
    double u = uniform01(rng) * mw.total;
    const auto n_w = static_cast<Count>(mw.w.size());
    Count below = mw.mode - mw.lo;
    Count above = below;
    u -= mw.w[below];
    if (u <= 0.0) return mw.mode;
    for (;;) {
        const bool can_down = below > 0;
        const bool can_up = above + 1 < n_w;
        if (!can_down && !can_up) return mw.mode;
        if (can_down && (!can_up || mw.w[below - 1] >= mw.w[above + 1])) {
            --below;
            u -= mw.w[below];
            if (u <= 0.0) return mw.lo + below;
        } else {
            ++above;
            u -= mw.w[above];
            if (u <= 0.0) return mw.lo + above;
        }
    }
}

double nchg_mean(const NchgParams& p) {
    p.validate();
    if (p.support_min() == p.support_max()) return static_cast<double>(p.support_min());
    const ModeWeights mw = nchg_mode_weights(p);
    double acc = 0.0;
    for (std::size_t i = 0; i < mw.w.size(); ++i)
        acc += mw.w[i] * static_cast<double>(mw.lo + static_cast<Count>(i));
    return acc / mw.total;
}

double biased_success_prob(double p, double phi) {
    check_unit_interval(p, "biased_success_prob");
    if (!(phi > 0.0) || !std::isfinite(phi)) throw std::domain_error("biased_success_prob: phi must be positive");
    return p * phi / (1.0 - p + p * phi);
}

double binomial_logpmf(Count y, Count n, double p) {
    if (y < 0 || y > n) return -kInf;
    if (p <= 0.0) return y == 0 ? 0.0 : -kInf;
    if (p >= 1.0) return y == n ? 0.0 : -kInf;
    return log_choose(n, y) + static_cast<double>(y) * std::log(p) +
           static_cast<double>(n - y) * std::log1p(-p);
}

} // namespace surveysynth
