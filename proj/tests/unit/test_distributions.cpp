#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "histwalk/distributions.hpp"
#include "histwalk/random.hpp"
#include "histwalk/stats.hpp"

using namespace histwalk;

namespace {

std::vector<IncrementDistribution> builtin_cases() {
    return {IncrementDistribution::gaussian(0.0, 1.0), IncrementDistribution::gaussian(1.0, 2.5), IncrementDistribution::rademacher(0.5),
            IncrementDistribution::rademacher(0.2), IncrementDistribution::finite_discrete({-1.0, 0.0, 2.0}, {0.25, 0.5, 0.25})};
}

} // namespace

TEST(Mean, MatchesAnalyticValues) {
    EXPECT_DOUBLE_EQ(mean(IncrementDistribution::gaussian(0.0, 1.0)), 0.0);
    EXPECT_DOUBLE_EQ(mean(IncrementDistribution::rademacher(0.5)), 0.0);
    EXPECT_NEAR(mean(IncrementDistribution::rademacher(0.8)), 0.6, 1e-12);
    EXPECT_NEAR(mean(IncrementDistribution::finite_discrete({-1.0, 0.0, 2.0}, {0.25, 0.5, 0.25})), 0.25, 1e-12);
}

TEST(Cgf, KnownValues) {
    EXPECT_NEAR(cgf(IncrementDistribution::gaussian(0.0, 1.0), 2.0), 2.0, 1e-12);
    EXPECT_EQ(cgf(IncrementDistribution::rademacher(0.5), 0.0), 0.0);
    EXPECT_NEAR(cgf(IncrementDistribution::rademacher(0.5), 1.0), std::log(std::cosh(1.0)), 1e-12);
    EXPECT_NEAR(cgf(IncrementDistribution::rademacher(0.5), 1.0), 0.433781, 1e-6);
}

TEST(Cgf, NoOverflowAtLargeArguments) {
    const auto d = IncrementDistribution::finite_discrete({-2.0, 0.0, 5.0}, {0.2, 0.5, 0.3});
    for (double t : {-700.0, -300.0, 300.0, 700.0}) {
        const double k = cgf(d, t);
        ASSERT_TRUE(std::isfinite(k)) << t;
        const double top = t > 0 ? 5.0 * t + std::log(0.3) : -2.0 * t + std::log(0.2);
        EXPECT_NEAR(k, top, 1e-9 * std::abs(top));
    }
}

TEST(CgfDerivatives, KnownValues) {
    const auto g = cgf_derivatives(IncrementDistribution::gaussian(1.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(g.first, 1.0);
    EXPECT_DOUBLE_EQ(g.second, 1.0);
    const auto r = cgf_derivatives(IncrementDistribution::rademacher(0.5), 0.0);
    EXPECT_NEAR(r.first, 0.0, 1e-15);
    EXPECT_NEAR(r.second, 1.0, 1e-15);
    const auto p = cgf_derivatives(IncrementDistribution::finite_discrete({0.0}, {1.0}), 5.0);
    EXPECT_EQ(p.first, 0.0);
    EXPECT_EQ(p.second, 0.0);
}

TEST(CgfDerivatives, RademacherClosedForm) {
    const auto d = IncrementDistribution::rademacher(0.5);
    for (double t = -3.0; t <= 3.0; t += 0.25) {
        const auto k = cgf_derivatives(d, t);
        EXPECT_NEAR(k.first, std::tanh(t), 1e-13);
        EXPECT_NEAR(k.second, 1.0 / (std::cosh(t) * std::cosh(t)), 1e-13);
    }
}

TEST(CgfDerivatives, MatchCentralFiniteDifferencesAndAreConvex) {
    const double h = 1e-4;
    for (const auto& d : builtin_cases()) {
        for (double t = -5.0; t <= 5.0; t += 0.5) {
            const auto k = cgf_derivatives(d, t);
            const double d1 = (cgf(d, t + h) - cgf(d, t - h)) / (2 * h);
            const double d2 = (cgf(d, t + h) - 2 * cgf(d, t) + cgf(d, t - h)) / (h * h);
            EXPECT_NEAR(k.first, d1, 1e-6 * std::max(1.0, std::abs(d1))) << d.describe() << " t=" << t;
            EXPECT_NEAR(k.second, d2, 1e-6 * std::max(1.0, std::abs(d2)) + 1e-4) << d.describe() << " t=" << t;
            EXPECT_GE(k.second, 0.0);
        }
        EXPECT_NEAR(cgf_derivatives(d, 0.0).first, mean(d), 1e-12);
        EXPECT_EQ(cgf(d, 0.0), 0.0);
    }
}

TEST(TailProb, KnownValues) {
    EXPECT_DOUBLE_EQ(tail_prob(IncrementDistribution::gaussian(0.0, 1.0), 0.0, Side::ge), 0.5);
    EXPECT_DOUBLE_EQ(tail_prob(IncrementDistribution::rademacher(0.5), 1.0, Side::ge), 0.5);
    EXPECT_DOUBLE_EQ(tail_prob(IncrementDistribution::rademacher(0.5), 1.0, Side::lt), 0.5);
    // Boundary atom belongs to the ge side.
    const auto d = IncrementDistribution::finite_discrete({-1.0, 0.0, 2.0}, {0.25, 0.5, 0.25});
    EXPECT_DOUBLE_EQ(tail_prob(d, 0.0, Side::ge), 0.75);
    EXPECT_DOUBLE_EQ(tail_prob(d, 0.0, Side::lt), 0.25);
    EXPECT_NEAR(tail_prob(IncrementDistribution::gaussian(1.0, 4.0), 3.0, Side::ge), 0.5 * std::erfc(1.0 / std::sqrt(2.0)), 1e-15);
}

TEST(Support, Endpoints) {
    EXPECT_TRUE(support_min(IncrementDistribution::gaussian(0.0, 1.0)).is_neg_infinity());
    EXPECT_TRUE(support_max(IncrementDistribution::gaussian(0.0, 1.0)).is_pos_infinity());
    EXPECT_EQ(support_min(IncrementDistribution::rademacher(0.3)), ExtendedReal(-1.0));
    EXPECT_EQ(support_max(IncrementDistribution::rademacher(0.3)), ExtendedReal(1.0));
}

TEST(Factories, RejectInvalidParameters) {
    EXPECT_THROW(IncrementDistribution::gaussian(0.0, 0.0), InvalidInput);
    EXPECT_THROW(IncrementDistribution::rademacher(1.0), InvalidInput);
    EXPECT_THROW(IncrementDistribution::rademacher(0.0), InvalidInput);
    EXPECT_THROW(IncrementDistribution::finite_discrete({1.0, 0.0}, {0.5, 0.5}), InvalidInput);
    EXPECT_THROW(IncrementDistribution::finite_discrete({0.0, 1.0}, {0.5, 0.6}), InvalidInput);
    EXPECT_THROW(IncrementDistribution::finite_discrete({0.0, 1.0}, {1.0, 0.0}), InvalidInput);
}

TEST(Sample, SupportAndPointMass) {
    RandomStream rng(11);
    const auto r = IncrementDistribution::rademacher(0.5);
    for (int k = 0; k < 1000; ++k) {
        const double x = sample(r, rng);
        EXPECT_TRUE(x == -1.0 || x == 1.0);
    }
    const auto p = IncrementDistribution::finite_discrete({3.0}, {1.0});
    for (int k = 0; k < 100; ++k) EXPECT_EQ(sample(p, rng), 3.0);
}

TEST(Sample, GaussianMeanWithinFourOverThousand) {
    RandomStream rng(2024);
    const auto d = IncrementDistribution::gaussian(0.0, 1.0);
    double s = 0.0;
    for (int k = 0; k < 1'000'000; ++k) s += sample(d, rng);
    EXPECT_LT(std::abs(s / 1e6), 4.0 / 1000.0);
}

TEST(Sample, EmpiricalMeansWithinFiveStandardErrors) {
    for (const auto& d : builtin_cases()) {
        RandomStream rng(77);
        RunningStats st;
        for (int k = 0; k < 1'000'000; ++k) st.push(sample(d, rng));
        EXPECT_LT(std::abs(st.mean() - mean(d)), 5.0 * st.stderr_of_mean()) << d.describe();
    }
}

TEST(Sample, DeterministicGivenSeed) {
    const auto d = IncrementDistribution::gaussian(0.3, 2.0);
    RandomStream a(5, 3);
    RandomStream b(5, 3);
    for (int k = 0; k < 100; ++k) EXPECT_EQ(sample(d, a), sample(d, b));
}
