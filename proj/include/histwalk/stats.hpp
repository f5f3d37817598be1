#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "histwalk/errors.hpp"

namespace histwalk {

/// Welford accumulator.
class RunningStats {
public:
    void push(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    void merge(const RunningStats& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double n = static_cast<double>(n_ + o.n_);
        const double delta = o.mean_ - mean_;
        mean_ += delta * static_cast<double>(o.n_) / n;
        m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
        n_ += o.n_;
    }

    [[nodiscard]] std::size_t count() const { return n_; }
    [[nodiscard]] double mean() const { return mean_; }
    [[nodiscard]] double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    [[nodiscard]] double stderr_of_mean() const {
        return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Binomial proportion with its plug-in standard error.
struct Proportion {
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;

    [[nodiscard]] double estimate() const { return trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0; }
    [[nodiscard]] double stderr_() const {
        if (trials == 0) return 0.0;
        const double p = estimate();
        return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    }
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0; // zero when only two points
};

/// Ordinary least squares y = intercept + slope * x.
inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) throw InvalidInput("fit_line: need at least two paired points");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    if (!(sxx > 0.0)) throw InvalidInput("fit_line: abscissae must not all coincide");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double ssr = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double r = ys[k] - fit.intercept - fit.slope * xs[k];
            ssr += r * r;
        }
        fit.slope_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

/// One Monte Carlo point of an exponential-scale fit.
struct GridPoint {
    int n = 0;
    double estimate = 0.0; // probability or mean, on the natural scale
    double stderr_ = 0.0;
    std::uint64_t hits = 0; // events counted; equals samples for mean estimates
    std::uint64_t samples = 0;
};

/// Exponential rate fitted as the slope of -log(estimate) (decay) or
/// +log(estimate) (growth) against n. Points with a zero estimate cannot be
/// placed on the log scale and are listed in `dropped`.
struct SlopeFit {
    std::vector<GridPoint> grid;
    std::vector<int> dropped;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
    /// Decay fits only: slope recomputed with each dropped point replaced by
    /// the 95% upper confidence bound 3/samples on its probability. Only set
    /// when every dropped point lies above the mean abscissa: raising such a
    /// point's probability can only flatten the fitted decay, so the result
    /// is a lower estimate of the exponent, usable for one-sided checks.
    std::optional<double> conservative_slope;
    /// Set when fewer than 3 points were usable; slope fields are then unset.
    bool degenerate = false;
};

enum class LogScale { decay, growth };

/// Throws DegenerateEstimate when fewer than 3 points remain, unless
/// `allow_degenerate` is set, in which case the result is flagged instead.
inline SlopeFit fit_log_slope(std::vector<GridPoint> grid, LogScale scale, bool allow_degenerate = false) {
    SlopeFit out;
    const double sign = scale == LogScale::decay ? -1.0 : 1.0;
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> cxs;
    std::vector<double> cys;
    for (const auto& g : grid) {
        if (g.estimate > 0.0) {
            xs.push_back(g.n);
            ys.push_back(sign * std::log(g.estimate));
            cxs.push_back(g.n);
            cys.push_back(sign * std::log(g.estimate));
        } else {
            out.dropped.push_back(g.n);
            if (scale == LogScale::decay && g.samples > 0) {
                cxs.push_back(g.n);
                cys.push_back(-std::log(3.0 / static_cast<double>(g.samples)));
            }
        }
    }
    out.grid = std::move(grid);
    if (scale == LogScale::decay && cxs.size() >= 2) {
        double mean_n = 0.0;
        for (double x : cxs) mean_n += x;
        mean_n /= static_cast<double>(cxs.size());
        bool late_only = true;
        for (int n : out.dropped) late_only = late_only && n > mean_n;
        if (late_only) out.conservative_slope = fit_line(cxs, cys).slope;
    }
    if (xs.size() < 3) {
        if (!allow_degenerate)
            throw DegenerateEstimate("fewer than 3 grid points with a positive estimate; raise the sample budget or lower the grid");
        out.degenerate = true;
        return out;
    }
    const LineFit fit = fit_line(xs, ys);
    out.slope = fit.slope;
    out.slope_stderr = fit.slope_stderr;
    out.intercept = fit.intercept;
    return out;
}

/// Standard error of the overall mean from equally sized batch means.
inline double batch_means_stderr(std::span<const double> batch_means) {
    RunningStats s;
    for (double b : batch_means) s.push(b);
    return s.stderr_of_mean();
}

} // namespace histwalk
