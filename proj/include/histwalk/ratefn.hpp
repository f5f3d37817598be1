#pragma once

// Legendre-Fenchel transform of an increment law,
//
//     I(r) = sup_l ( l r - K(l) ),   K = log M,
//
// as an extended-real function. I is +inf outside [x-, x+] (the closed hull
// of the support), zero at the mean, increasing on [mean, x+) and decreasing
// on (x-, mean].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "histwalk/distributions.hpp"
#include "histwalk/errors.hpp"
#include "histwalk/extended_real.hpp"
#include "histwalk/parallel.hpp"
#include "histwalk/random.hpp"
#include "histwalk/stats.hpp"

namespace histwalk {

/// I(r) together with the maximizing tilt. The tilt is +/-inf at boundary
/// atoms and outside the domain.
struct RateSolution {
    ExtendedReal value;
    ExtendedReal lambda_star;
    int iterations = 0;
};

class RateFunction {
public:
    static constexpr int kMaxIterations = 200;

    explicit RateFunction(IncrementDistribution dist)
        : dist_(std::move(dist)), mean_(histwalk::mean(dist_)), x_minus_(support_min(dist_)), x_plus_(support_max(dist_)) {}

    [[nodiscard]] const IncrementDistribution& distribution() const { return dist_; }
    [[nodiscard]] ExtendedReal x_minus() const { return x_minus_; }
    [[nodiscard]] ExtendedReal x_plus() const { return x_plus_; }
    [[nodiscard]] std::pair<ExtendedReal, ExtendedReal> domain_endpoints() const { return {x_minus_, x_plus_}; }

    [[nodiscard]] ExtendedReal evaluate(double r) const { return solve(r).value; }
    [[nodiscard]] ExtendedReal operator()(double r) const { return evaluate(r); }

    /// Throws NonConvergence when the stationarity equation K'(l) = r cannot
    /// be met to 1e-10 * max(1, |r|) within 200 iterations.
    [[nodiscard]] RateSolution solve(double r) const {
        if (std::isnan(r)) throw InvalidInput("rate function evaluated at NaN");
        if (const auto* g = std::get_if<Gaussian>(&dist_.law())) {
            const double d = r - g->mu;
            return {ExtendedReal(d * d / (2.0 * g->sigma2)), ExtendedReal(d / g->sigma2), 0};
        }
        if (ExtendedReal(r) < x_minus_) return {ExtendedReal::infinity(), ExtendedReal::neg_infinity(), 0};
        if (ExtendedReal(r) > x_plus_) return {ExtendedReal::infinity(), ExtendedReal::infinity(), 0};
        if (ExtendedReal(r) == x_plus_) return {ExtendedReal(-std::log(dist_.weights().back())), ExtendedReal::infinity(), 0};
        if (ExtendedReal(r) == x_minus_) return {ExtendedReal(-std::log(dist_.weights().front())), ExtendedReal::neg_infinity(), 0};
        if (r == mean_) return {ExtendedReal(0.0), ExtendedReal(0.0), 0};
        return solve_interior(r);
    }

private:
    RateSolution solve_interior(double r) const {
        const double tol = 1e-10 * std::max(1.0, std::abs(r));
        auto residual = [&](double l) { return cgf_derivatives(dist_, l).first - r; };

        // K' is increasing, so an expanding bracket around 0 always captures
        // the root for r strictly inside the support hull.
        int iterations = 0;
        double lo = 0.0;
        double hi = 0.0;
        const double g0 = residual(0.0);
        if (g0 < 0.0) {
            double step = 1.0;
            hi = step;
            while (residual(hi) < 0.0) {
                if (++iterations >= kMaxIterations) throw NonConvergence(fail_message(r));
                lo = hi;
                step *= 2.0;
                hi += step;
            }
        } else {
            double step = 1.0;
            lo = -step;
            while (residual(lo) > 0.0) {
                if (++iterations >= kMaxIterations) throw NonConvergence(fail_message(r));
                hi = lo;
                step *= 2.0;
                lo -= step;
            }
        }

        // Safeguarded Newton: take the Newton step when it stays strictly
        // inside the bracket, otherwise bisect.
        double l = std::clamp(0.0, lo, hi);
        for (; iterations < kMaxIterations; ++iterations) {
            const auto [k1, k2] = cgf_derivatives(dist_, l);
            const double g = k1 - r;
            if (std::abs(g) <= tol) return {ExtendedReal(l * r - cgf(dist_, l)), ExtendedReal(l), iterations};
            if (g < 0.0)
                lo = l;
            else
                hi = l;
            double next = k2 > 0.0 ? l - g / k2 : lo;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (next == l) break; // bracket collapsed to one double
            l = next;
        }
        throw NonConvergence(fail_message(r));
    }

    std::string fail_message(double r) const {
        return "rate function: Newton/bisection did not converge at r=" + std::to_string(r) + " for " + dist_.describe();
    }

    IncrementDistribution dist_;
    double mean_;
    ExtendedReal x_minus_;
    ExtendedReal x_plus_;
};

/// Direction of the deviation probed by the Cramer estimators.
enum class Deviation { ge, le };

/// Monte Carlo estimate of P(S_n/n >= r) (or <= r) from `samples` walks.
inline GridPoint estimate_mean_tail(const IncrementDistribution& d, double r, Deviation side, int n, std::uint64_t samples,
                                    std::uint64_t seed, unsigned threads = 0) {
    if (n < 1 || samples == 0) throw InvalidInput("estimate_mean_tail: need n >= 1 and samples > 0");
    struct Count {
        std::uint64_t hits = 0;
        std::uint64_t trials = 0;
        void merge(const Count& o) {
            hits += o.hits;
            trials += o.trials;
        }
    };
    const auto count = chunked_monte_carlo<Count>(
        samples, seed,
        [&](RandomStream& rng, std::uint64_t trials, Count& acc) {
            for (std::uint64_t t = 0; t < trials; ++t) {
                double s = 0.0;
                for (int j = 0; j < n; ++j) s += sample(d, rng);
                const double avg = s / n;
                acc.hits += side == Deviation::ge ? (avg >= r) : (avg <= r);
            }
            acc.trials += trials;
        },
        threads);
    const Proportion p{count.hits, count.trials};
    return {n, p.estimate(), p.stderr_(), count.hits, count.trials};
}

/// Monte Carlo check of Cramer asymptotics: estimates P(S_n/n >= r) (or
/// <= r) for every n of the grid and fits -log p_n against n. The slope
/// approaches I(r) as n grows; finite grids carry a polynomial prefactor
/// bias of order log(n)/n.
///
/// Grid point k draws from streams derived from (master_seed, k), so each
/// point is reproducible on its own.
inline SlopeFit verify_cramer_slope(const IncrementDistribution& d, double r, Deviation side, std::span<const int> n_grid,
                                    std::uint64_t master_seed, std::uint64_t samples_per_n, unsigned threads = 0) {
    if (n_grid.size() < 3) throw InvalidInput("verify_cramer_slope: n_grid needs at least 3 entries");
    for (std::size_t k = 0; k < n_grid.size(); ++k) {
        if (n_grid[k] < 1 || (k > 0 && n_grid[k] <= n_grid[k - 1]))
            throw InvalidInput("verify_cramer_slope: n_grid must be positive and strictly increasing");
    }
    const double mu = mean(d);
    if (side == Deviation::ge ? !(r >= mu && ExtendedReal(r) < support_max(d)) : !(r <= mu && ExtendedReal(r) > support_min(d)))
        throw InvalidInput("verify_cramer_slope: r must lie between the mean and the relevant support endpoint");
    if (samples_per_n == 0) throw InvalidInput("verify_cramer_slope: samples_per_n must be positive");

    std::vector<GridPoint> grid;
    for (std::size_t k = 0; k < n_grid.size(); ++k)
        grid.push_back(estimate_mean_tail(d, r, side, n_grid[k], samples_per_n, derive_seed(master_seed, k), threads));
    return fit_log_slope(std::move(grid), LogScale::decay);
}

} // namespace histwalk
