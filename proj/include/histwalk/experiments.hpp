#pragma once

// Monte Carlo harness confronting simulation with the closed-form
// predictions: speed estimates, window sweeps, block-variable and exit-time
// exponent fits, and the persistence diagnostic.
//
// Every estimator derives its RNG streams from (master seed, grid index,
// replica or chunk index), and folds results in index order, so reports are
// reproducible bit for bit regardless of the thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "histwalk/distributions.hpp"
#include "histwalk/errors.hpp"
#include "histwalk/extended_real.hpp"
#include "histwalk/model.hpp"
#include "histwalk/parallel.hpp"
#include "histwalk/random.hpp"
#include "histwalk/ratefn.hpp"
#include "histwalk/simulator.hpp"
#include "histwalk/stats.hpp"
#include "histwalk/theory.hpp"

namespace histwalk {

// ---------------------------------------------------------------------------
// Speed estimation
// ---------------------------------------------------------------------------

struct RegimeStats {
    std::uint64_t completed = 0;
    double mean_sojourn = 0.0; // steps per completed sojourn (tau + N)
    double sojourn_stderr = 0.0;
    double mean_displacement = 0.0;
    double displacement_stderr = 0.0;
    double exit_up_fraction = 0.0;
    double exit_down_fraction = 0.0;
    double wald_residual = 0.0; // mean(D - mu_i T)
    double wald_stderr = 0.0;
    bool insufficient = false; // no completed sojourn in this regime
};

struct SimReport {
    Version version = Version::delayed;
    int window = 0;
    std::int64_t steps = 0;
    int replicas = 0;
    int batches = 0;
    std::uint64_t master_seed = 0;

    double est_speed = 0.0;
    double est_speed_stderr = 0.0; // batch means over all replicas
    std::vector<double> replica_speeds;

    std::vector<double> occupancy;          // fraction of steps per regime
    std::vector<double> switch_frequencies; // fraction of completed sojourns per regime
    std::uint64_t completed_sojourns = 0;
    std::vector<RegimeStats> per_regime;

    /// Empirical p_{i,i+1} / p_{i,i-1}; absent where the move is impossible
    /// or the regime was never left.
    std::vector<std::optional<double>> p_up;
    std::vector<std::optional<double>> p_down;

    std::optional<double> reconstructed_speed; // renewal-reward formula on empirical components
    double reconstructed_stderr = 0.0;

    std::vector<std::string> warnings;
};

struct EstimateOptions {
    int batches = 32;
    unsigned threads = 0;
};

/// Long-run speed of `replicas` independent walks of length `steps`.
/// Replica k uses stream (master_seed, k).
inline SimReport estimate_speed(const ModelSpec& spec, Version version, std::int64_t steps, int replicas, std::uint64_t master_seed,
                                const EstimateOptions& opt = {}) {
    spec.check_structure();
    if (steps < 50LL * spec.window) throw InvalidInput("estimate_speed: steps must be at least 50*N");
    if (replicas < 2) throw InvalidInput("estimate_speed: need at least 2 replicas");
    const int R = spec.regimes();

    struct ReplicaSummary {
        double speed = 0.0;
        std::vector<double> batch_speeds;
        std::vector<SojournRecord> sojourns;
    };
    const auto runs = parallel_map(
        static_cast<std::size_t>(replicas),
        [&](std::size_t k) {
            RandomStream rng(master_seed, k);
            RunResult res = run(spec, version, steps, rng, RunOptions{opt.batches, false});
            ReplicaSummary sum;
            sum.speed = res.final_state.position / static_cast<double>(res.final_state.time);
            sum.batch_speeds = std::move(res.batch_speeds);
            sum.sojourns = std::move(res.path.sojourns);
            return sum;
        },
        opt.threads);

    SimReport rep;
    rep.version = version;
    rep.window = spec.window;
    rep.steps = steps;
    rep.replicas = replicas;
    rep.batches = opt.batches;
    rep.master_seed = master_seed;

    RunningStats speeds;
    std::vector<double> batches;
    std::vector<double> occupancy_steps(R, 0.0);
    double total_steps = 0.0;
    std::vector<RunningStats> soj(R), disp(R), wald(R);
    std::vector<std::uint64_t> ups(R, 0), downs(R, 0);
    RunningStats ratio_d, ratio_t;
    std::vector<double> all_d, all_t;
    std::vector<double> mu;
    for (const auto& d : spec.dists) mu.push_back(mean(d));

    for (const auto& r : runs) {
        rep.replica_speeds.push_back(r.speed);
        speeds.push(r.speed);
        batches.insert(batches.end(), r.batch_speeds.begin(), r.batch_speeds.end());
        for (const auto& s : r.sojourns) {
            occupancy_steps[s.regime] += static_cast<double>(s.steps);
            total_steps += static_cast<double>(s.steps);
            if (s.censored) continue;
            const double t = static_cast<double>(s.steps);
            soj[s.regime].push(t);
            disp[s.regime].push(s.displacement);
            wald[s.regime].push(s.displacement - mu[s.regime] * t);
            (*s.exit_direction == Direction::up ? ups : downs)[s.regime]++;
            all_d.push_back(s.displacement);
            all_t.push_back(t);
        }
    }
    rep.est_speed = speeds.mean();
    rep.est_speed_stderr = batch_means_stderr(batches);

    for (int i = 0; i < R; ++i) rep.occupancy.push_back(total_steps > 0 ? occupancy_steps[i] / total_steps : 0.0);
    rep.completed_sojourns = all_t.size();
    for (int i = 0; i < R; ++i) {
        RegimeStats st;
        st.completed = soj[i].count();
        st.insufficient = st.completed == 0;
        if (!st.insufficient) {
            st.mean_sojourn = soj[i].mean();
            st.sojourn_stderr = soj[i].stderr_of_mean();
            st.mean_displacement = disp[i].mean();
            st.displacement_stderr = disp[i].stderr_of_mean();
            st.exit_up_fraction = static_cast<double>(ups[i]) / static_cast<double>(st.completed);
            st.exit_down_fraction = static_cast<double>(downs[i]) / static_cast<double>(st.completed);
            st.wald_residual = wald[i].mean();
            st.wald_stderr = wald[i].stderr_of_mean();
        } else {
            rep.warnings.push_back("regime " + std::to_string(i) + ": no completed sojourn (insufficient data)");
        }
        rep.per_regime.push_back(st);
        rep.switch_frequencies.push_back(rep.completed_sojourns ? static_cast<double>(st.completed) / static_cast<double>(rep.completed_sojourns)
                                                                : 0.0);
        const bool can_up = i < R - 1;
        const bool can_down = i > 0;
        rep.p_up.push_back(can_up && !st.insufficient ? std::optional(st.exit_up_fraction) : std::nullopt);
        rep.p_down.push_back(can_down && !st.insufficient ? std::optional(st.exit_down_fraction) : std::nullopt);
    }

    if (!all_t.empty()) {
        std::vector<double> mean_t, mean_d;
        for (const auto& st : rep.per_regime) {
            mean_t.push_back(st.mean_sojourn);
            mean_d.push_back(st.mean_displacement);
        }
        const double s = speed_formula(rep.switch_frequencies, mean_t, mean_d);
        rep.reconstructed_speed = s;
        // Delta-method error of the pooled ratio sum D / sum T.
        RunningStats resid;
        double tbar = 0.0;
        for (std::size_t k = 0; k < all_t.size(); ++k) {
            resid.push(all_d[k] - s * all_t[k]);
            tbar += all_t[k];
        }
        tbar /= static_cast<double>(all_t.size());
        rep.reconstructed_stderr = resid.stderr_of_mean() / tbar;
    }
    return rep;
}

/// Empirical regime frequencies against the detailed-balance solution built
/// from empirical transition probabilities.
struct InvariantMeasureCheck {
    std::vector<double> empirical;
    std::vector<double> empirical_stderr;
    std::vector<double> detailed_balance;
    std::vector<double> detailed_balance_stderr;
    std::vector<double> z_scores;

    [[nodiscard]] bool within(double z_max) const {
        return std::all_of(z_scores.begin(), z_scores.end(), [&](double z) { return z <= z_max; });
    }
};

inline InvariantMeasureCheck check_invariant_measure(const SimReport& rep) {
    const std::size_t R = rep.per_regime.size();
    std::vector<double> up, down, up_se, down_se;
    for (std::size_t i = 0; i + 1 < R; ++i) {
        if (!rep.p_up[i] || !rep.p_down[i + 1]) throw InvalidChain("check_invariant_measure: a regime was never left");
        up.push_back(*rep.p_up[i]);
        down.push_back(*rep.p_down[i + 1]);
        auto se = [](double p, std::uint64_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); };
        up_se.push_back(se(up.back(), rep.per_regime[i].completed));
        down_se.push_back(se(down.back(), rep.per_regime[i + 1].completed));
    }
    InvariantMeasureCheck out;
    out.empirical = rep.switch_frequencies;
    const double M = static_cast<double>(rep.completed_sojourns);
    for (double v : out.empirical) out.empirical_stderr.push_back(std::sqrt(v * (1.0 - v) / M));
    out.detailed_balance = invariant_distribution(up, down);

    // Propagate the binomial errors of the p-hats by central differences.
    std::vector<double> var(R, 0.0);
    auto accumulate = [&](std::vector<double>& probs, std::size_t j, double se) {
        if (se <= 0.0) return;
        const double h = std::min(se, 0.5 * std::min(probs[j], 1.0 - probs[j] > 0 ? 1.0 - probs[j] : probs[j])) + 1e-300;
        const double orig = probs[j];
        probs[j] = orig + h;
        const auto plus = invariant_distribution(up, down);
        probs[j] = orig - h;
        const auto minus = invariant_distribution(up, down);
        probs[j] = orig;
        for (std::size_t i = 0; i < R; ++i) {
            const double g = (plus[i] - minus[i]) / (2.0 * h);
            var[i] += g * g * se * se;
        }
    };
    for (std::size_t j = 0; j < up.size(); ++j) {
        accumulate(up, j, up_se[j]);
        accumulate(down, j, down_se[j]);
    }
    for (std::size_t i = 0; i < R; ++i) {
        out.detailed_balance_stderr.push_back(std::sqrt(var[i]));
        const double combined = std::hypot(out.empirical_stderr[i], out.detailed_balance_stderr[i]);
        const double diff = std::abs(out.empirical[i] - out.detailed_balance[i]);
        out.z_scores.push_back(combined > 0.0 ? diff / combined : (diff == 0.0 ? 0.0 : INFINITY));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Window sweeps
// ---------------------------------------------------------------------------

/// steps(N) = max(min_steps, multiplier * round(exp(N * e_max))), capped,
/// where e_max is the largest sojourn exponent of the model at window N.
struct StepsRule {
    std::int64_t min_steps = 1'000'000;
    double multiplier = 200.0;
    std::int64_t cap = 100'000'000;

    struct Budget {
        std::int64_t steps = 0;
        bool cap_binding = false;
    };

    [[nodiscard]] Budget steps_for(const ModelSpec& spec) const {
        ExtendedReal e_max(0.0);
        for (const auto& e : sojourn_exponents(spec)) e_max = max(e_max, e);
        const double wanted = e_max.is_finite() ? multiplier * std::round(std::exp(spec.window * e_max.value())) : INFINITY;
        const double steps = std::max(static_cast<double>(min_steps), wanted);
        if (steps > static_cast<double>(cap)) return {cap, true};
        return {static_cast<std::int64_t>(steps), false};
    }
};

struct SweepRow {
    int window = 0;
    std::int64_t steps = 0;
    bool cap_binding = false;
    SimReport report;
    double gap = 0.0; // |est_speed - predicted limit|
    double gap_stderr = 0.0;
};

struct SweepResult {
    SpeedPrediction prediction;
    std::vector<SweepRow> rows;
    double gap_at_largest = 0.0;
    /// gap(N_{k+1}) <= gap(N_k) + z * combined stderr for every k.
    bool gaps_non_increasing = false;
    double noise_z = 3.0;
    std::string note = "monotone-trend check at finite N; the limit itself carries no finite-N rate";
};

/// Estimates the speed for each window of the grid, compared with the
/// predicted N -> inf limit. Grid point k uses master seed
/// derive_seed(master_seed, k).
inline SweepResult sweep_window(const ModelSpec& base, Version version, std::span<const int> n_grid, const StepsRule& rule, int replicas,
                                std::uint64_t master_seed, const EstimateOptions& opt = {}) {
    if (n_grid.empty()) throw InvalidInput("sweep_window: empty grid");
    for (std::size_t k = 1; k < n_grid.size(); ++k)
        if (n_grid[k] <= n_grid[k - 1]) throw InvalidInput("sweep_window: n_grid must be strictly increasing");
    if (!validate(base).passed()) throw AssumptionViolation("sweep_window: model fails the modelling assumptions");
    SweepResult out;
    out.prediction = predict_limiting_speed(base);
    if (!out.prediction.speed) throw InvalidInput("sweep_window: the exponent maximum is tied; no limit to compare against");
    const double limit = *out.prediction.speed;

    for (std::size_t k = 0; k < n_grid.size(); ++k) {
        ModelSpec spec = base;
        spec.window = n_grid[k];
        const auto budget = rule.steps_for(spec);
        SweepRow row;
        row.window = spec.window;
        row.steps = budget.steps;
        row.cap_binding = budget.cap_binding;
        row.report = estimate_speed(spec, version, budget.steps, replicas, derive_seed(master_seed, k), opt);
        row.gap = std::abs(row.report.est_speed - limit);
        row.gap_stderr = row.report.est_speed_stderr;
        out.rows.push_back(std::move(row));
    }
    out.gap_at_largest = out.rows.back().gap;
    out.gaps_non_increasing = true;
    for (std::size_t k = 1; k < out.rows.size(); ++k) {
        const double slack = out.noise_z * std::hypot(out.rows[k].gap_stderr, out.rows[k - 1].gap_stderr);
        if (out.rows[k].gap > out.rows[k - 1].gap + slack) out.gaps_non_increasing = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Block variables
// ---------------------------------------------------------------------------

struct BlockCounts {
    std::uint64_t plus1 = 0, minus1 = 0, minus11 = 0, zero = 0;

    void merge(const BlockCounts& o) {
        plus1 += o.plus1;
        minus1 += o.minus1;
        minus11 += o.minus11;
        zero += o.zero;
    }
    [[nodiscard]] std::uint64_t total() const { return plus1 + minus1 + minus11 + zero; }
};

inline BlockCounts count_blocks(const IncrementDistribution& d, ExtendedReal r_lo, ExtendedReal r_hi, int N, std::uint64_t samples,
                                std::uint64_t seed, unsigned threads = 0) {
    return chunked_monte_carlo<BlockCounts>(
        samples, seed,
        [&](RandomStream& rng, std::uint64_t n, BlockCounts& acc) {
            std::vector<double> scratch;
            for (std::uint64_t t = 0; t < n; ++t) {
                switch (sample_block_Z(d, r_lo, r_hi, N, rng, scratch)) {
                case BlockOutcome::plus1: ++acc.plus1; break;
                case BlockOutcome::minus1: ++acc.minus1; break;
                case BlockOutcome::minus11: ++acc.minus11; break;
                case BlockOutcome::zero: ++acc.zero; break;
                }
            }
        },
        threads);
}

struct BlockExponentReport {
    std::vector<int> n_grid;
    std::vector<BlockCounts> counts;
    SlopeFit plus1;   // target I(r_hi)
    SlopeFit minus1;  // target I(r_lo)
    SlopeFit minus11; // bounded below by I(r_lo) + I(r_hi) in the limit; may be degenerate
    double target_plus1 = 0.0;
    double target_minus1 = 0.0;
    double bound_minus11 = 0.0;
};

/// Fits the decay exponents of P(Z = plus1), P(Z = minus1), P(Z = minus11).
/// Throws DegenerateEstimate if plus1 or minus1 has fewer than 3 nonzero
/// grid points; minus11 is allowed to degenerate and then only carries its
/// conservative slope.
inline BlockExponentReport fit_block_exponents(const IncrementDistribution& d, double r_lo, double r_hi, std::span<const int> n_grid,
                                               std::uint64_t samples_per_n, std::uint64_t master_seed, unsigned threads = 0) {
    if (!(r_lo < r_hi)) throw InvalidInput("fit_block_exponents: need r_lo < r_hi");
    const RateFunction rf(d);
    const ExtendedReal i_lo = rf(r_lo);
    const ExtendedReal i_hi = rf(r_hi);
    if (!i_lo.is_finite() || !i_hi.is_finite()) throw InvalidInput("fit_block_exponents: rate must be finite at both thresholds");
    BlockExponentReport rep;
    rep.target_plus1 = i_hi.value();
    rep.target_minus1 = i_lo.value();
    rep.bound_minus11 = i_lo.value() + i_hi.value();
    std::vector<GridPoint> gp, gm, gmm;
    for (std::size_t k = 0; k < n_grid.size(); ++k) {
        const int N = n_grid[k];
        const auto c = count_blocks(d, ExtendedReal(r_lo), ExtendedReal(r_hi), N, samples_per_n, derive_seed(master_seed, k), threads);
        rep.n_grid.push_back(N);
        rep.counts.push_back(c);
        auto point = [&](std::uint64_t hits) {
            const Proportion p{hits, c.total()};
            return GridPoint{N, p.estimate(), p.stderr_(), hits, c.total()};
        };
        gp.push_back(point(c.plus1));
        gm.push_back(point(c.minus1));
        gmm.push_back(point(c.minus11));
    }
    rep.plus1 = fit_log_slope(std::move(gp), LogScale::decay);
    rep.minus1 = fit_log_slope(std::move(gm), LogScale::decay);
    rep.minus11 = fit_log_slope(std::move(gmm), LogScale::decay, true);
    return rep;
}

// ---------------------------------------------------------------------------
// Exit statistics
// ---------------------------------------------------------------------------

struct ExitPoint {
    int window = 0;
    std::uint64_t samples = 0;
    std::uint64_t censored = 0;
    std::uint64_t exits_up = 0;
    std::uint64_t exits_down = 0;
    double mean_tau = 0.0; // over uncensored samples
    double tau_stderr = 0.0;
    double mean_displacement = 0.0;
    double wald_residual = 0.0; // mean(D - mu (tau + N))
    double wald_stderr = 0.0;

    [[nodiscard]] double censored_fraction() const { return samples ? static_cast<double>(censored) / static_cast<double>(samples) : 0.0; }
};

struct ExitStatsReport {
    std::vector<ExitPoint> points;
    std::optional<SlopeFit> exit_down; // decay of P(exit down); absent when r_lo = -inf
    SlopeFit tau;                      // growth of E tau
    double target_exit_down = 0.0;     // (I(r_lo) - I(r_hi))^+
    double target_tau = 0.0;           // min over finite thresholds of I
    double max_censored_fraction = 0.0;
};

inline constexpr double kMaxCensoredFraction = 0.05;

inline ExitPoint collect_exits(const IncrementDistribution& d, ExtendedReal r_lo, ExtendedReal r_hi, int N, std::uint64_t samples,
                               std::int64_t cap, std::uint64_t seed, unsigned threads = 0) {
    struct Acc {
        std::uint64_t censored = 0, up = 0, down = 0;
        RunningStats tau, disp, wald;
        void merge(const Acc& o) {
            censored += o.censored;
            up += o.up;
            down += o.down;
            tau.merge(o.tau);
            disp.merge(o.disp);
            wald.merge(o.wald);
        }
    };
    const double mu = mean(d);
    const auto acc = chunked_monte_carlo<Acc>(
        samples, seed,
        [&](RandomStream& rng, std::uint64_t n, Acc& a) {
            for (std::uint64_t t = 0; t < n; ++t) {
                const auto rec = sample_exit(d, r_lo, r_hi, N, rng, cap);
                if (rec.censored) {
                    ++a.censored;
                    continue;
                }
                (*rec.exit_direction == Direction::up ? a.up : a.down)++;
                a.tau.push(static_cast<double>(rec.steps - N));
                a.disp.push(rec.displacement);
                a.wald.push(rec.displacement - mu * static_cast<double>(rec.steps));
            }
        },
        threads);
    ExitPoint p;
    p.window = N;
    p.samples = samples;
    p.censored = acc.censored;
    p.exits_up = acc.up;
    p.exits_down = acc.down;
    p.mean_tau = acc.tau.mean();
    p.tau_stderr = acc.tau.stderr_of_mean();
    p.mean_displacement = acc.disp.mean();
    p.wald_residual = acc.wald.mean();
    p.wald_stderr = acc.wald.stderr_of_mean();
    return p;
}

/// Exit direction and exit time exponents of a single regime. Throws
/// ExcessCensoring when more than 5% of the samples at some N hit `cap`.
inline ExitStatsReport fit_exit_statistics(const IncrementDistribution& d, ExtendedReal r_lo, ExtendedReal r_hi, std::span<const int> n_grid,
                                           std::uint64_t samples_per_n, std::int64_t cap, std::uint64_t master_seed, unsigned threads = 0) {
    if (!(r_lo < r_hi)) throw InvalidInput("fit_exit_statistics: need r_lo < r_hi");
    if (!r_lo.is_finite() && !r_hi.is_finite()) throw InvalidInput("fit_exit_statistics: at least one threshold must be finite");
    const RateFunction rf(d);
    const std::optional<ExtendedReal> i_lo = r_lo.is_finite() ? std::optional(rf(r_lo.value())) : std::nullopt;
    const std::optional<ExtendedReal> i_hi = r_hi.is_finite() ? std::optional(rf(r_hi.value())) : std::nullopt;

    ExitStatsReport rep;
    if (i_lo && i_hi) {
        rep.target_exit_down = positive_part(*i_lo - *i_hi).raw();
        rep.target_tau = min(*i_lo, *i_hi).raw();
    } else {
        rep.target_tau = (i_lo ? *i_lo : *i_hi).raw();
    }

    std::vector<GridPoint> down, tau;
    for (std::size_t k = 0; k < n_grid.size(); ++k) {
        const auto p = collect_exits(d, r_lo, r_hi, n_grid[k], samples_per_n, cap, derive_seed(master_seed, k), threads);
        rep.max_censored_fraction = std::max(rep.max_censored_fraction, p.censored_fraction());
        const std::uint64_t done = p.exits_up + p.exits_down;
        const Proportion pd{p.exits_down, done};
        down.push_back({p.window, pd.estimate(), pd.stderr_(), p.exits_down, done});
        tau.push_back({p.window, p.mean_tau, p.tau_stderr, done, done});
        rep.points.push_back(p);
    }
    if (rep.max_censored_fraction > kMaxCensoredFraction)
        throw ExcessCensoring("fit_exit_statistics: censored fraction " + std::to_string(rep.max_censored_fraction) +
                              " exceeds 5%; raise the cap or lower the grid");
    if (i_lo) rep.exit_down = fit_log_slope(std::move(down), LogScale::decay);
    rep.tau = fit_log_slope(std::move(tau), LogScale::growth);
    return rep;
}

// ---------------------------------------------------------------------------
// Persistence diagnostic
// ---------------------------------------------------------------------------

struct PersistenceEstimate {
    int horizon = 0;
    std::uint64_t samples = 0;
    std::uint64_t survivors = 0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    /// (h, estimate at horizon h) for h = 1, 10, 100, ... and the horizon.
    /// Exactly non-increasing: every sample contributes its first failure time.
    std::vector<std::pair<int, double>> curve;
};

/// Monte Carlo estimate of P(S_n/n >= r for all n <= horizon), an upper
/// bound for the infinite-horizon persistence probability (positive for
/// every r < mean).
inline PersistenceEstimate estimate_persistence_constant(const IncrementDistribution& d, double r, int horizon, std::uint64_t samples,
                                                         std::uint64_t master_seed, unsigned threads = 0) {
    if (!(r < mean(d))) throw InvalidInput("estimate_persistence_constant: need r < mean");
    if (horizon < 1 || samples == 0) throw InvalidInput("estimate_persistence_constant: need horizon >= 1 and samples > 0");
    std::vector<int> marks;
    for (long h = 1; h < horizon; h *= 10) marks.push_back(static_cast<int>(h));
    marks.push_back(horizon);

    struct Acc {
        std::vector<std::uint64_t> alive; // survivors at each mark
        void merge(const Acc& o) {
            if (alive.empty()) alive.assign(o.alive.size(), 0);
            for (std::size_t k = 0; k < o.alive.size(); ++k) alive[k] += o.alive[k];
        }
    };
    const auto acc = chunked_monte_carlo<Acc>(
        samples, master_seed,
        [&](RandomStream& rng, std::uint64_t n, Acc& a) {
            a.alive.assign(marks.size(), 0);
            for (std::uint64_t t = 0; t < n; ++t) {
                double s = 0.0;
                int first_fail = horizon + 1;
                for (int k = 1; k <= horizon; ++k) {
                    s += sample(d, rng);
                    if (s / k < r) {
                        first_fail = k;
                        break;
                    }
                }
                for (std::size_t m = 0; m < marks.size(); ++m) a.alive[m] += first_fail > marks[m];
            }
        },
        threads);
    PersistenceEstimate out;
    out.horizon = horizon;
    out.samples = samples;
    out.survivors = acc.alive.back();
    const Proportion p{out.survivors, samples};
    out.estimate = p.estimate();
    out.stderr_ = p.stderr_();
    for (std::size_t m = 0; m < marks.size(); ++m)
        out.curve.emplace_back(marks[m], static_cast<double>(acc.alive[m]) / static_cast<double>(samples));
    return out;
}

} // namespace histwalk
