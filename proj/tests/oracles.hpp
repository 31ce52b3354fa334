#pragma once

// Reference computations written independently of the library code.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Fisher non-central hypergeometric pmf by brute-force enumeration.
inline std::vector<double> nchg_pmf(int m1, int m2, int n, double phi) {
    std::vector<double> w(n + 1, 0.0);
    double total = 0.0;
    for (int y = 0; y <= n; ++y) {
        w[y] = choose(m1, y) * choose(m2, n - y) * std::pow(phi, y);
        total += w[y];
    }
    for (double& v : w) v /= total;
    return w;
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

inline double normal_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * M_PI * var);
}

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Quantile of a density tabulated on an equally spaced grid (trapezoid CDF).
inline double grid_quantile(const std::vector<double>& x, const std::vector<double>& dens, double p) {
    std::vector<double> cdf(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (x[i] - x[i - 1]);
    const double target = p * cdf.back();
    for (std::size_t i = 1; i < x.size(); ++i)
        if (cdf[i] >= target) {
            const double f = (target - cdf[i - 1]) / (cdf[i] - cdf[i - 1]);
            return x[i - 1] + f * (x[i] - x[i - 1]);
        }
    return x.back();
}

/// Pearson chi-square statistic; bins with expected count < 5 are pooled.
inline double chi_square(const std::vector<double>& observed, const std::vector<double>& expected, int& dof) {
    double stat = 0.0, o_acc = 0.0, e_acc = 0.0;
    int bins = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o_acc += observed[i];
        e_acc += expected[i];
        if (e_acc >= 5.0) {
            stat += (o_acc - e_acc) * (o_acc - e_acc) / e_acc;
            o_acc = e_acc = 0.0;
            ++bins;
        }
    }
    if (e_acc > 0.0) {
        stat += (o_acc - e_acc) * (o_acc - e_acc) / e_acc;
        ++bins;
    }
    dof = bins - 1;
    return stat;
}

/// Upper 1% point of chi-square(dof), Wilson-Hilferty approximation.
inline double chi_square_crit_01(int dof) {
    const double z = 2.326347874;
    const double a = 2.0 / (9.0 * dof);
    return dof * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

} // namespace oracle
