#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "histwalk/distributions.hpp"
#include "histwalk/errors.hpp"
#include "histwalk/extended_real.hpp"

namespace histwalk {

/// A history-reinforced walk: increment laws P_0..P_l, thresholds
/// r_1 < ... < r_l, history window N and starting regime i_0.
///
/// Regime i is the band [r_i, r_{i+1}) with sentinels r_0 = -inf and
/// r_{l+1} = +inf; `lower_threshold`/`upper_threshold` expose the padded
/// sequence.
struct ModelSpec {
    std::vector<IncrementDistribution> dists;
    std::vector<double> thresholds;
    int window = 1;
    int initial_regime = 0;

    [[nodiscard]] int levels() const { return static_cast<int>(thresholds.size()); }
    [[nodiscard]] int regimes() const { return levels() + 1; }

    [[nodiscard]] ExtendedReal lower_threshold(int regime) const {
        return regime == 0 ? ExtendedReal::neg_infinity() : ExtendedReal(thresholds[regime - 1]);
    }
    [[nodiscard]] ExtendedReal upper_threshold(int regime) const {
        return regime == levels() ? ExtendedReal::infinity() : ExtendedReal(thresholds[regime]);
    }

    /// Shape checks only; the modelling assumptions live in theory::validate.
    void check_structure() const {
        if (thresholds.empty()) throw InvalidInput("model: need at least one threshold (l >= 1)");
        if (dists.size() != thresholds.size() + 1)
            throw InvalidInput("model: expected l+1 = " + std::to_string(thresholds.size() + 1) + " distributions, got " +
                               std::to_string(dists.size()));
        for (double r : thresholds)
            if (!std::isfinite(r)) throw InvalidInput("model: thresholds must be finite");
        if (window < 1) throw InvalidInput("model: window N must be >= 1");
        if (initial_regime < 0 || initial_regime > levels()) throw InvalidInput("model: initial_regime must lie in [0, l]");
    }
};

} // namespace histwalk
