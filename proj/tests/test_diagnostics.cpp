#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "surveysynth/diagnostics.hpp"
#include "surveysynth/rng.hpp"

using namespace surveysynth;

TEST(RHat, ConstantChainsGiveOne) {
    const std::vector<std::vector<double>> c(4, std::vector<double>(100, 2.5));
    EXPECT_DOUBLE_EQ(r_hat(c), 1.0);
}

TEST(RHat, SeparatedConstantChains) {
    const std::vector<std::vector<double>> c = {std::vector<double>(100, 0.0), std::vector<double>(100, 10.0)};
    EXPECT_GT(r_hat(c), 1.1);
    std::vector<std::vector<double>> noisy = c;
    Rng rng(3);
    for (auto& ch : noisy)
        for (double& v : ch) v += 0.01 * std_normal(rng);
    EXPECT_GT(r_hat(noisy), 10.0);
}

TEST(RHat, IidChainsNearOne) {
    Rng rng(4);
    std::vector<std::vector<double>> c(4, std::vector<double>(10000));
    for (auto& ch : c)
        for (double& v : ch) v = std_normal(rng);
    const double r = r_hat(c);
    EXPECT_NEAR(r, 1.0, 0.02);
    EXPECT_GE(r, 0.99);
}

TEST(RHat, SplitDetectsTrendWithinOneChain) {
    std::vector<std::vector<double>> c(1, std::vector<double>(1000));
    for (int i = 0; i < 1000; ++i) c[0][i] = i * 0.01;
    EXPECT_GT(r_hat(c), 1.1);
}

TEST(RHat, RejectsShortOrRaggedInput) {
    EXPECT_THROW(r_hat({{1.0, 2.0, 3.0}}), std::invalid_argument);
    EXPECT_THROW(r_hat({{1.0, 2.0, 3.0, 4.0}, {1.0, 2.0, 3.0, 4.0, 5.0}}), std::invalid_argument);
    EXPECT_THROW(r_hat({}), std::invalid_argument);
}

TEST(Ess, IidNearSampleSize) {
    Rng rng(5);
    std::vector<std::vector<double>> c(4, std::vector<double>(5000));
    for (auto& ch : c)
        for (double& v : ch) v = std_normal(rng);
    const double ess = effective_sample_size(c);
    EXPECT_GT(ess, 0.8 * 20000);
    EXPECT_LT(ess, 1.2 * 20000);
}

TEST(Ess, Ar1MatchesTheory) {
    Rng rng(6);
    const double rho = 0.9;
    std::vector<std::vector<double>> c(4, std::vector<double>(20000));
    for (auto& ch : c) {
        double x = std_normal(rng) / std::sqrt(1 - rho * rho);
        for (double& v : ch) {
            x = rho * x + std_normal(rng);
            v = x;
        }
    }
    const double theory = 80000 * (1 - rho) / (1 + rho);
    EXPECT_NEAR(effective_sample_size(c) / theory, 1.0, 0.2);
}

TEST(Ess, ConstantSeries) {
    const std::vector<std::vector<double>> c(2, std::vector<double>(50, 1.0));
    EXPECT_GT(effective_sample_size(c), 0.0);
}

TEST(Quantile, OrderStatisticOracle) {
    Rng rng(7);
    std::vector<double> v(1001);
    for (double& x : v) x = std_normal(rng);
    std::sort(v.begin(), v.end());
    // With 1001 points the type-7 quantile at i/1000 is exactly the i-th order statistic.
    for (int i : {0, 25, 500, 975, 1000}) EXPECT_EQ(quantile_sorted(v, i / 1000.0), v[i]);
    const double h = 1000 * 0.0255;
    const int lo = static_cast<int>(std::floor(h));
    EXPECT_NEAR(quantile_sorted(v, 0.0255), v[lo] + (h - lo) * (v[lo + 1] - v[lo]), 1e-12);
}

TEST(Quantile, PointMassAndSingleton) {
    const std::vector<double> v(20, 3.25);
    EXPECT_EQ(quantile_sorted(v, 0.025), 3.25);
    EXPECT_EQ(quantile_sorted(v, 0.5), 3.25);
    const std::vector<double> one = {1.5};
    EXPECT_EQ(quantile_sorted(one, 0.9), 1.5);
    const std::vector<double> two = {1.0, 3.0};
    EXPECT_DOUBLE_EQ(quantile_sorted(two, 0.5), 2.0);
}
