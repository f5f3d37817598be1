#pragma once

// Closed-form large-N predictions for the delayed walk.
//
// With a_k = I_k(r_k) and b_k = I_k(r_{k+1}):
//
//   Lambda_0 = b_0
//   Lambda_i = b_i + sum_{k=1..i}   (a_k - b_k)     1 <= i <= l-1
//   Lambda_l = a_l + sum_{k=1..l-1} (a_k - b_k)
//
// If the maximum is attained at a single i_0, the speed tends to mu_{i_0}
// as N -> inf. Ties are reported and never resolved.
//
// The regime chain is birth-death, with p_{i,i+1} ~ exp(-N (b_i - a_i)^+),
// p_{i,i-1} ~ exp(-N (a_i - b_i)^+) for interior i, and certain exits from
// the two end regimes. A sojourn in regime i lasts tau + N steps with
// E tau ~ exp(N min(a_i, b_i)) (one-sided at the ends).

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "histwalk/distributions.hpp"
#include "histwalk/errors.hpp"
#include "histwalk/extended_real.hpp"
#include "histwalk/model.hpp"
#include "histwalk/ratefn.hpp"

namespace histwalk {

struct Violation {
    int index = 0; // regime or threshold index the failure refers to
    std::string message;
};

struct AssumptionCheck {
    std::string name;
    bool passed = true;
    std::vector<Violation> violations;
    std::string note;
};

struct ValidationReport {
    AssumptionCheck a{"A", true, {}, {}};
    AssumptionCheck b{"B", true, {}, {}};
    AssumptionCheck c{"C", true, {}, {}};

    [[nodiscard]] bool passed() const { return a.passed && b.passed && c.passed; }
};

/// Checks ordering of means and thresholds (A), positive exit masses (B)
/// and the exponential moment condition (C). Failures are report entries.
inline ValidationReport validate(const ModelSpec& spec) {
    spec.check_structure();
    ValidationReport rep;
    const int l = spec.levels();
    std::vector<double> mu;
    for (const auto& d : spec.dists) mu.push_back(mean(d));
    const auto& r = spec.thresholds; // r[k-1] is r_k

    auto fail = [](AssumptionCheck& chk, int idx, std::string msg) {
        chk.passed = false;
        chk.violations.push_back({idx, std::move(msg)});
    };

    for (int i = 0; i < l; ++i)
        if (!(mu[i] < mu[i + 1])) fail(rep.a, i + 1, "means not strictly increasing: mu_" + std::to_string(i) + " >= mu_" + std::to_string(i + 1));
    if (!(mu[0] < r[0])) fail(rep.a, 0, "mu_0 < r_1 violated");
    for (int i = 1; i <= l - 1; ++i) {
        if (!(r[i - 1] < mu[i])) fail(rep.a, i, "r_" + std::to_string(i) + " < mu_" + std::to_string(i) + " violated");
        if (!(mu[i] < r[i])) fail(rep.a, i, "mu_" + std::to_string(i) + " < r_" + std::to_string(i + 1) + " violated");
    }
    if (!(r[l - 1] < mu[l])) fail(rep.a, l, "r_l < mu_l violated");

    if (!(tail_prob(spec.dists[0], r[0], Side::ge) > 0.0)) fail(rep.b, 0, "P_0([r_1, inf)) = 0");
    for (int i = 1; i <= l - 1; ++i) {
        if (!(tail_prob(spec.dists[i], r[i - 1], Side::lt) > 0.0))
            fail(rep.b, i, "P_" + std::to_string(i) + "((-inf, r_" + std::to_string(i) + ")) = 0");
        if (!(tail_prob(spec.dists[i], r[i], Side::ge) > 0.0))
            fail(rep.b, i, "P_" + std::to_string(i) + "([r_" + std::to_string(i + 1) + ", inf)) = 0");
    }
    if (!(tail_prob(spec.dists[l], r[l - 1], Side::lt) > 0.0)) fail(rep.b, l, "P_l((-inf, r_l)) = 0");

    rep.c.note = "satisfied by construction: every supported family has a finite MGF on the whole line";
    return rep;
}

/// I_i at the regime's own thresholds. `lower` is absent for regime 0 and
/// `upper` for regime l (their thresholds are the infinite sentinels).
struct ThresholdRates {
    std::optional<ExtendedReal> lower; // I_i(r_i)
    std::optional<ExtendedReal> upper; // I_i(r_{i+1})
};

inline std::vector<ThresholdRates> threshold_rates(const ModelSpec& spec) {
    spec.check_structure();
    const int l = spec.levels();
    std::vector<ThresholdRates> out(l + 1);
    for (int i = 0; i <= l; ++i) {
        const RateFunction rf(spec.dists[i]);
        if (i > 0) out[i].lower = rf(spec.thresholds[i - 1]);
        if (i < l) out[i].upper = rf(spec.thresholds[i]);
    }
    return out;
}

/// Lambda_0..Lambda_l.
inline std::vector<ExtendedReal> lambda_exponents(const ModelSpec& spec) {
    const auto rates = threshold_rates(spec);
    const int l = spec.levels();
    std::vector<ExtendedReal> out(l + 1);
    out[0] = *rates[0].upper;
    ExtendedReal drift(0.0); // sum_{k=1..i} (a_k - b_k)
    for (int i = 1; i <= l - 1; ++i) {
        drift = drift + (*rates[i].lower - *rates[i].upper);
        out[i] = *rates[i].upper + drift;
    }
    out[l] = *rates[l].lower + drift;
    return out;
}

struct SpeedPrediction {
    std::vector<int> argmax_set;
    std::optional<int> regime;  // i_0, only when the maximum is unique
    std::optional<double> speed; // mu_{i_0}
    bool infinite_exponent = false; // some Lambda_i = +inf; asymptotics are less trustworthy there
};

inline constexpr double kDefaultTieTolerance = 1e-9;

/// Argmax of the exponents within `tie_tol`.
inline SpeedPrediction predict_from_exponents(std::span<const ExtendedReal> lambdas, std::span<const double> means,
                                              double tie_tol = kDefaultTieTolerance) {
    SpeedPrediction p;
    ExtendedReal best = ExtendedReal::neg_infinity();
    for (const auto& x : lambdas) best = max(best, x);
    p.infinite_exponent = best.is_pos_infinity();
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const bool in_set = best.is_pos_infinity() ? lambdas[i].is_pos_infinity() : lambdas[i].raw() >= best.raw() - tie_tol;
        if (in_set) p.argmax_set.push_back(static_cast<int>(i));
    }
    if (p.argmax_set.size() == 1) {
        p.regime = p.argmax_set.front();
        p.speed = means[*p.regime];
    }
    return p;
}

inline SpeedPrediction predict_limiting_speed(const ModelSpec& spec, double tie_tol = kDefaultTieTolerance) {
    const auto lambdas = lambda_exponents(spec);
    std::vector<double> mu;
    for (const auto& d : spec.dists) mu.push_back(mean(d));
    return predict_from_exponents(lambdas, mu, tie_tol);
}

/// Exponents of p_{i,i+1} and p_{i,i-1}; the direction that does not exist
/// at an end regime is absent, and the single exit there has exponent 0.
struct TransitionExponent {
    std::optional<ExtendedReal> up;
    std::optional<ExtendedReal> down;
};

inline std::vector<TransitionExponent> transition_exponents(const ModelSpec& spec) {
    const auto rates = threshold_rates(spec);
    const int l = spec.levels();
    std::vector<TransitionExponent> out(l + 1);
    out[0].up = ExtendedReal(0.0);
    out[l].down = ExtendedReal(0.0);
    for (int i = 1; i <= l - 1; ++i) {
        out[i].up = positive_part(*rates[i].upper - *rates[i].lower);
        out[i].down = positive_part(*rates[i].lower - *rates[i].upper);
    }
    return out;
}

/// Exponent of E tau for each regime.
inline std::vector<ExtendedReal> sojourn_exponents(const ModelSpec& spec) {
    const auto rates = threshold_rates(spec);
    const int l = spec.levels();
    std::vector<ExtendedReal> out(l + 1);
    out[0] = *rates[0].upper;
    out[l] = *rates[l].lower;
    for (int i = 1; i <= l - 1; ++i) out[i] = min(*rates[i].lower, *rates[i].upper);
    return out;
}

/// Exponents of nu(i) relative to nu(0), read off the detailed-balance
/// products: nu(k) ~ nu(0) prod_{i=1..k} p_{i-1,i} / p_{i,i-1}.
inline std::vector<ExtendedReal> nu_exponents(std::span<const TransitionExponent> transitions) {
    std::vector<ExtendedReal> out(transitions.size());
    out[0] = ExtendedReal(0.0);
    for (std::size_t k = 1; k < transitions.size(); ++k)
        out[k] = out[k - 1] + transitions[k].down.value() - transitions[k - 1].up.value();
    return out;
}

/// Stationary law of a birth-death chain on {0..l} from
/// up[i] = p_{i,i+1} and down[i] = p_{i+1,i}, i = 0..l-1.
///
/// Products are accumulated in log space, so ratios like exp(+-40) survive.
/// Throws InvalidChain when a required probability is not positive.
inline std::vector<double> invariant_distribution(std::span<const double> up, std::span<const double> down) {
    if (up.size() != down.size() || up.empty()) throw InvalidChain("invariant_distribution: up/down must have equal length l >= 1");
    for (std::size_t i = 0; i < up.size(); ++i)
        if (!(up[i] > 0.0) || !(down[i] > 0.0) || !std::isfinite(up[i]) || !std::isfinite(down[i]))
            throw InvalidChain("invariant_distribution: transition probability at index " + std::to_string(i) + " is not positive");
    std::vector<double> lognu(up.size() + 1, 0.0);
    for (std::size_t k = 1; k < lognu.size(); ++k) lognu[k] = lognu[k - 1] + std::log(up[k - 1]) - std::log(down[k - 1]);
    const double top = *std::max_element(lognu.begin(), lognu.end());
    double z = 0.0;
    for (double v : lognu) z += std::exp(v - top);
    std::vector<double> nu(lognu.size());
    for (std::size_t k = 0; k < nu.size(); ++k) nu[k] = std::exp(lognu[k] - top) / z;
    return nu;
}

/// Renewal-reward speed: sum nu(i) E S^(i) / sum nu(i) E[tau_i + N].
/// `mean_sojourn` holds the mean number of steps per sojourn (tau + N).
inline double speed_formula(std::span<const double> nu, std::span<const double> mean_sojourn, std::span<const double> mean_displacement) {
    if (nu.size() != mean_sojourn.size() || nu.size() != mean_displacement.size() || nu.empty())
        throw InvalidInput("speed_formula: sequences must be nonempty and of equal length");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        num += nu[i] * mean_displacement[i];
        den += nu[i] * mean_sojourn[i];
    }
    if (!(den > 0.0)) throw InvalidInput("speed_formula: total expected sojourn must be positive");
    return num / den;
}

struct RegimeTheory {
    std::optional<ExtendedReal> up_exp;
    std::optional<ExtendedReal> down_exp;
    ExtendedReal sojourn_exp;
    ExtendedReal nu_exp;
};

struct TheoryReport {
    std::vector<ExtendedReal> lambdas;
    std::vector<double> means;
    SpeedPrediction prediction;
    std::vector<RegimeTheory> per_regime;
    double tie_tol = kDefaultTieTolerance;
    std::vector<std::string> warnings;
};

/// Everything `predict` reports. Throws AssumptionViolation if validate fails.
inline TheoryReport analyze(const ModelSpec& spec, double tie_tol = kDefaultTieTolerance) {
    const auto check = validate(spec);
    if (!check.passed()) throw AssumptionViolation("model fails the modelling assumptions; run validate for details");
    TheoryReport rep;
    rep.tie_tol = tie_tol;
    rep.lambdas = lambda_exponents(spec);
    for (const auto& d : spec.dists) rep.means.push_back(mean(d));
    rep.prediction = predict_from_exponents(rep.lambdas, rep.means, tie_tol);
    const auto trans = transition_exponents(spec);
    const auto soj = sojourn_exponents(spec);
    const auto nu = nu_exponents(trans);
    for (int i = 0; i <= spec.levels(); ++i) rep.per_regime.push_back({trans[i].up, trans[i].down, soj[i], nu[i]});
    if (rep.prediction.argmax_set.size() > 1)
        rep.warnings.push_back("maximum exponent is attained at several regimes; no limiting speed is predicted for ties");
    if (rep.prediction.infinite_exponent)
        rep.warnings.push_back("an exponent is infinite; finite-N behaviour may be far from the limit");
    return rep;
}

} // namespace histwalk
