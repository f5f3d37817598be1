#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "histwalk/random.hpp"
#include "histwalk/ratefn.hpp"

using namespace histwalk;

namespace {

// Relative entropy of Bernoulli((1+r)/2) with respect to Bernoulli(p).
double binary_relative_entropy(double r, double p) {
    const double q = 0.5 * (1.0 + r);
    auto term = [](double a, double b) { return a > 0.0 ? a * std::log(a / b) : 0.0; };
    return term(q, p) + term(1.0 - q, 1.0 - p);
}

// Exact P(S_n >= k) for +-1 steps with P(+1) = 1/2, in integer arithmetic.
double binomial_upper_tail_half(int n, int min_ups) {
    unsigned long long total = 0;
    unsigned long long c = 1; // C(n, 0)
    for (int k = 0; k <= n; ++k) {
        if (k >= min_ups) total += c;
        c = c * static_cast<unsigned long long>(n - k) / static_cast<unsigned long long>(k + 1);
    }
    return static_cast<double>(total) / std::ldexp(1.0, n);
}

} // namespace

TEST(RateFunction, GaussianClosedForm) {
    const RateFunction rf(IncrementDistribution::gaussian(1.0, 1.0));
    EXPECT_NEAR(rf(0.4).value(), 0.18, 1e-15);
    EXPECT_NEAR(rf(1.6).value(), 0.18, 1e-15);
    EXPECT_EQ(rf(1.0).value(), 0.0);
    const auto sol = rf.solve(2.5);
    EXPECT_DOUBLE_EQ(sol.lambda_star.value(), 1.5);
}

TEST(RateFunction, ZeroAtMean) {
    for (const auto& d : {IncrementDistribution::rademacher(0.3), IncrementDistribution::finite_discrete({-1.0, 0.0, 2.0}, {0.25, 0.5, 0.25})}) {
        const RateFunction rf(d);
        EXPECT_NEAR(rf(mean(d)).value(), 0.0, 1e-15);
    }
}

TEST(RateFunction, BoundaryAtomsAndOutsideSupport) {
    const RateFunction rf(IncrementDistribution::rademacher(0.5));
    EXPECT_NEAR(rf(1.0).value(), std::log(2.0), 1e-15);
    EXPECT_NEAR(rf(1.0).value(), 0.693147, 1e-6);
    EXPECT_NEAR(rf(-1.0).value(), std::log(2.0), 1e-15);
    EXPECT_TRUE(rf(1.0001).is_pos_infinity());
    EXPECT_TRUE(rf(-3.0).is_pos_infinity());
    EXPECT_TRUE(rf.solve(2.0).lambda_star.is_pos_infinity());
}

TEST(RateFunction, DomainEndpoints) {
    const auto [gm, gp] = RateFunction(IncrementDistribution::gaussian(0.0, 1.0)).domain_endpoints();
    EXPECT_TRUE(gm.is_neg_infinity());
    EXPECT_TRUE(gp.is_pos_infinity());
    const auto [rm, rp] = RateFunction(IncrementDistribution::rademacher(0.3)).domain_endpoints();
    EXPECT_EQ(rm.value(), -1.0);
    EXPECT_EQ(rp.value(), 1.0);
    const auto [fm, fp] = RateFunction(IncrementDistribution::finite_discrete({-2.0, 0.0, 5.0}, {0.2, 0.5, 0.3})).domain_endpoints();
    EXPECT_EQ(fm.value(), -2.0);
    EXPECT_EQ(fp.value(), 5.0);
}

TEST(RateFunction, RademacherMatchesBinaryRelativeEntropy) {
    for (double p : {0.2, 0.5, 0.8}) {
        const RateFunction rf(IncrementDistribution::rademacher(p));
        for (double r = -0.99; r <= 0.99; r += 0.01) EXPECT_NEAR(rf(r).value(), binary_relative_entropy(r, p), 1e-8) << "p=" << p << " r=" << r;
    }
    EXPECT_NEAR(RateFunction(IncrementDistribution::rademacher(0.5))(0.5).value(), 0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-10);
    EXPECT_NEAR(RateFunction(IncrementDistribution::rademacher(0.5))(0.5).value(), 0.130812, 1e-6);
}

TEST(RateFunction, MonotoneOnEachSideOfTheMean) {
    const auto d = IncrementDistribution::finite_discrete({-2.0, 0.0, 5.0}, {0.2, 0.5, 0.3});
    const RateFunction rf(d);
    const double mu = mean(d);
    double prev = 0.0;
    for (int k = 1; k < 100; ++k) {
        const double r = mu + (5.0 - mu) * k / 100.0;
        const double v = rf(r).value();
        EXPECT_GT(v, prev - 1e-9);
        prev = v;
    }
    prev = 0.0;
    for (int k = 1; k < 100; ++k) {
        const double r = mu - (mu + 2.0) * k / 100.0;
        const double v = rf(r).value();
        EXPECT_GT(v, prev - 1e-9);
        prev = v;
    }
}

TEST(RateFunction, ConjugateDualitySpotCheck) {
    const auto d = IncrementDistribution::finite_discrete({-1.0, 0.5, 3.0}, {0.3, 0.4, 0.3});
    const RateFunction rf(d);
    RandomStream rng(9);
    for (double r : {-0.7, 0.1, 0.9, 2.2}) {
        const auto sol = rf.solve(r);
        const double best = sol.lambda_star.value() * r - cgf(d, sol.lambda_star.value());
        EXPECT_NEAR(best, sol.value.value(), 1e-12);
        for (int k = 0; k < 50; ++k) {
            const double l = sol.lambda_star.value() + 4.0 * (rng.uniform() - 0.5);
            EXPECT_GE(best, l * r - cgf(d, l) - 1e-12);
        }
    }
}

TEST(RateFunction, NewtonResidualMeetsTolerance) {
    const auto d = IncrementDistribution::finite_discrete({-3.0, -1.0, 0.0, 4.0}, {0.1, 0.2, 0.6, 0.1});
    const RateFunction rf(d);
    for (double r = -2.95; r < 3.95; r += 0.35) {
        const auto sol = rf.solve(r);
        EXPECT_LE(std::abs(cgf_derivatives(d, sol.lambda_star.value()).first - r), 1e-10 * std::max(1.0, std::abs(r)));
        EXPECT_LE(sol.iterations, RateFunction::kMaxIterations);
    }
}

TEST(MeanTail, ExactBinomialOracle) {
    const double exact = binomial_upper_tail_half(20, 15);
    EXPECT_NEAR(exact, 21700.0 / 1048576.0, 1e-15);
    const auto g = estimate_mean_tail(IncrementDistribution::rademacher(0.5), 0.5, Deviation::ge, 20, 200'000, 42);
    EXPECT_LT(std::abs(g.estimate - exact), 3.0 * g.stderr_);
}

TEST(CramerSlope, FlatAtTheMean) {
    const int grid[] = {5, 10, 20};
    const auto fit = verify_cramer_slope(IncrementDistribution::gaussian(0.0, 1.0), 0.0, Deviation::ge, grid, 3, 20'000);
    EXPECT_NEAR(fit.slope, 0.0, 0.01);
    for (const auto& g : fit.grid) EXPECT_NEAR(g.estimate, 0.5, 0.02);
}

TEST(CramerSlope, RejectsBadInputs) {
    const int short_grid[] = {5, 10};
    const int unsorted[] = {5, 20, 10};
    const int good[] = {5, 10, 20};
    const auto d = IncrementDistribution::gaussian(0.0, 1.0);
    EXPECT_THROW(verify_cramer_slope(d, 0.5, Deviation::ge, short_grid, 1, 100), InvalidInput);
    EXPECT_THROW(verify_cramer_slope(d, 0.5, Deviation::ge, unsorted, 1, 100), InvalidInput);
    EXPECT_THROW(verify_cramer_slope(d, -0.5, Deviation::ge, good, 1, 100), InvalidInput);
    EXPECT_THROW(verify_cramer_slope(IncrementDistribution::rademacher(0.5), 1.0, Deviation::ge, good, 1, 100), InvalidInput);
}

TEST(CramerSlope, TooFewNonzeroPointsIsDegenerate) {
    const int grid[] = {50, 100, 200};
    EXPECT_THROW(verify_cramer_slope(IncrementDistribution::gaussian(0.0, 1.0), 1.5, Deviation::ge, grid, 1, 1000), DegenerateEstimate);
}

TEST(CramerSlope, LowerDeviationMirrorsUpper) {
    const int grid[] = {4, 8, 12, 16};
    const auto d = IncrementDistribution::rademacher(0.5);
    const auto up = verify_cramer_slope(d, 0.5, Deviation::ge, grid, 21, 200'000);
    const auto down = verify_cramer_slope(d, -0.5, Deviation::le, grid, 21, 200'000);
    EXPECT_NEAR(up.slope, down.slope, 4.0 * std::hypot(up.slope_stderr, down.slope_stderr) + 0.01);
}
