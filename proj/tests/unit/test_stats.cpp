#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "histwalk/extended_real.hpp"
#include "histwalk/parallel.hpp"
#include "histwalk/random.hpp"
#include "histwalk/stats.hpp"

using namespace histwalk;

TEST(ExtendedReal, OrderingAndArithmetic) {
    const auto inf = ExtendedReal::infinity();
    const auto ninf = ExtendedReal::neg_infinity();
    EXPECT_LT(ninf, ExtendedReal(-1e308));
    EXPECT_LT(ExtendedReal(1e308), inf);
    EXPECT_EQ(inf + ExtendedReal(3.0), inf);
    EXPECT_THROW(inf + ninf, InvalidInput);
    EXPECT_THROW(ExtendedReal(std::nan("")), InvalidInput);
    EXPECT_THROW((void)inf.value(), InvalidInput);
    EXPECT_EQ(inf.to_string(), "inf");
    EXPECT_EQ(ninf.to_string(), "-inf");
    EXPECT_EQ(ExtendedReal(0.25).to_string(), "0.25");
    EXPECT_EQ(positive_part(ExtendedReal(-2.0)), ExtendedReal(0.0));
    EXPECT_EQ(positive_part(inf), inf);
}

TEST(RunningStats, MergeEqualsSequential) {
    RandomStream rng(1);
    RunningStats all, a, b;
    for (int k = 0; k < 1000; ++k) {
        const double x = rng.normal();
        all.push(x);
        (k < 300 ? a : b).push(x);
    }
    a.merge(b);
    EXPECT_EQ(a.count(), all.count());
    EXPECT_NEAR(a.mean(), all.mean(), 1e-12);
    EXPECT_NEAR(a.variance(), all.variance(), 1e-12);
}

TEST(FitLine, ExactLine) {
    const double x[] = {1, 2, 3, 4};
    const double y[] = {3, 5, 7, 9};
    const auto f = fit_line(x, y);
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(f.intercept, 1.0, 1e-12);
    EXPECT_NEAR(f.slope_stderr, 0.0, 1e-12);
}

TEST(FitLogSlope, DecayAndGrowth) {
    std::vector<GridPoint> decay, growth;
    for (int n : {10, 20, 40}) {
        decay.push_back({n, std::exp(-0.125 * n), 0.0, 1, 1});
        growth.push_back({n, std::exp(0.3 * n + 1.0), 0.0, 1, 1});
    }
    EXPECT_NEAR(fit_log_slope(decay, LogScale::decay).slope, 0.125, 1e-12);
    const auto g = fit_log_slope(growth, LogScale::growth);
    EXPECT_NEAR(g.slope, 0.3, 1e-12);
    EXPECT_NEAR(g.intercept, 1.0, 1e-12);
}

TEST(FitLogSlope, DroppedPointsAndConservativeSlope) {
    std::vector<GridPoint> g = {{10, 0.1, 0.0, 100'000, 1'000'000}, {20, 0.01, 0.0, 10'000, 1'000'000}, {30, 0.0, 0.0, 0, 1'000'000}};
    EXPECT_THROW(fit_log_slope(g, LogScale::decay), DegenerateEstimate);
    const auto f = fit_log_slope(g, LogScale::decay, true);
    EXPECT_TRUE(f.degenerate);
    EXPECT_EQ(f.dropped, std::vector<int>{30});
    ASSERT_TRUE(f.conservative_slope.has_value());
    // A zero at large n replaced by 3/samples can only flatten the decay.
    EXPECT_GT(*f.conservative_slope, 0.0);

    // Early zero: the substitute would steepen the fit, so none is offered.
    std::vector<GridPoint> early = {{10, 0.0, 0.0, 0, 10}, {20, 0.01, 0.0, 1, 100}, {30, 0.001, 0.0, 1, 1000}};
    EXPECT_FALSE(fit_log_slope(early, LogScale::decay, true).conservative_slope.has_value());
}

TEST(RandomStream, DerivedStreamsDiffer) {
    RandomStream a(1, 0), b(1, 1), c(2, 0);
    const double x = a.uniform(), y = b.uniform(), z = c.uniform();
    EXPECT_NE(x, y);
    EXPECT_NE(x, z);
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    for (int k = 0; k < 1000; ++k) {
        const double u = a.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(ParallelMap, IndexOrderAndExceptions) {
    const auto v = parallel_map(100, [](std::size_t k) { return static_cast<int>(k * k); }, 4);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_EQ(v[k], static_cast<int>(k * k));
    EXPECT_THROW(parallel_map(
                     10,
                     [](std::size_t k) {
                         if (k == 7) throw InvalidInput("boom");
                         return 0;
                     },
                     3),
                 InvalidInput);
}

TEST(ChunkedMonteCarlo, ThreadCountDoesNotChangeTheResult) {
    struct Sum {
        RunningStats s;
        void merge(const Sum& o) { s.merge(o.s); }
    };
    auto body = [](RandomStream& rng, std::uint64_t n, Sum& acc) {
        for (std::uint64_t k = 0; k < n; ++k) acc.s.push(rng.normal());
    };
    const auto one = chunked_monte_carlo<Sum>(300'000, 5, body, 1);
    const auto four = chunked_monte_carlo<Sum>(300'000, 5, body, 4);
    EXPECT_EQ(one.s.count(), 300'000u);
    EXPECT_EQ(one.s.mean(), four.s.mean());
    EXPECT_EQ(one.s.variance(), four.s.variance());
}
