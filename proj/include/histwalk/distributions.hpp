#pragma once

// Increment laws with everywhere-finite moment generating functions.
//
// Three families are supported: Gaussian, Rademacher (atoms -1 and +1) and
// finitely supported laws. All of them have M(t) < inf for every real t, so
// the two-sided exponential moment condition needed for Cramer asymptotics
// holds without any runtime check. Heavier tails are deliberately absent.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "histwalk/errors.hpp"
#include "histwalk/extended_real.hpp"
#include "histwalk/random.hpp"

namespace histwalk {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

struct Gaussian {
    double mu = 0.0;
    double sigma2 = 1.0;
};

/// +1 with probability p, -1 with probability 1 - p.
struct Rademacher {
    double p = 0.5;
};

struct FiniteDiscrete {
    std::vector<double> atoms;   // strictly increasing
    std::vector<double> weights; // positive, normalized to sum 1
};

/// Which side of a threshold a tail probability measures. `ge` keeps the
/// boundary atom, matching half-open regime intervals [r_i, r_{i+1}).
enum class Side { ge, lt };

struct CgfDerivatives {
    double first = 0.0;  // K'(t), mean of the tilted law
    double second = 0.0; // K''(t), variance of the tilted law
};

/// Immutable increment law. Construct through the named factories, which
/// enforce the family invariants.
class IncrementDistribution {
public:
    using Law = std::variant<Gaussian, Rademacher, FiniteDiscrete>;

    static IncrementDistribution gaussian(double mu, double sigma2) {
        if (!std::isfinite(mu) || !std::isfinite(sigma2) || !(sigma2 > 0.0))
            throw InvalidInput("gaussian: need finite mu and sigma2 > 0");
        return IncrementDistribution(Gaussian{mu, sigma2});
    }

    static IncrementDistribution rademacher(double p) {
        if (!(p > 0.0 && p < 1.0)) throw InvalidInput("rademacher: need 0 < p < 1");
        return IncrementDistribution(Rademacher{p});
    }

    static IncrementDistribution finite_discrete(std::vector<double> atoms, std::vector<double> weights) {
        if (atoms.empty() || atoms.size() != weights.size())
            throw InvalidInput("finite_discrete: atoms and weights must be nonempty and of equal length");
        for (std::size_t k = 0; k < atoms.size(); ++k) {
            if (!std::isfinite(atoms[k])) throw InvalidInput("finite_discrete: atoms must be finite");
            if (!(weights[k] > 0.0) || !std::isfinite(weights[k]))
                throw InvalidInput("finite_discrete: weights must be positive");
            if (k > 0 && !(atoms[k - 1] < atoms[k]))
                throw InvalidInput("finite_discrete: atoms must be strictly increasing");
        }
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("finite_discrete: weights must sum to 1 within 1e-12");
        for (double& w : weights) w /= total;
        return IncrementDistribution(FiniteDiscrete{std::move(atoms), std::move(weights)});
    }

    [[nodiscard]] const Law& law() const { return law_; }

    /// Atoms and weights for the lattice families; empty for Gaussian.
    [[nodiscard]] std::span<const double> atoms() const { return atoms_; }
    [[nodiscard]] std::span<const double> weights() const { return weights_; }
    [[nodiscard]] bool is_discrete() const { return !atoms_.empty(); }

    [[nodiscard]] std::string describe() const {
        return std::visit(Overloaded{
                              [](const Gaussian& g) { return "gaussian(" + std::to_string(g.mu) + "," + std::to_string(g.sigma2) + ")"; },
                              [](const Rademacher& r) { return "rademacher(" + std::to_string(r.p) + ")"; },
                              [](const FiniteDiscrete& f) { return "discrete(" + std::to_string(f.atoms.size()) + " atoms)"; },
                          },
                          law_);
    }

private:
    explicit IncrementDistribution(Law law) : law_(std::move(law)) {
        if (const auto* r = std::get_if<Rademacher>(&law_)) {
            atoms_ = {-1.0, 1.0};
            weights_ = {1.0 - r->p, r->p};
        } else if (const auto* f = std::get_if<FiniteDiscrete>(&law_)) {
            atoms_ = f->atoms;
            weights_ = f->weights;
        }
        cumulative_.resize(weights_.size());
        std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
    }

    friend double sample(const IncrementDistribution&, RandomStream&);

    Law law_;
    std::vector<double> atoms_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

namespace detail {

/// log sum_k w_k exp(t x_k), shifted by the largest exponent.
inline double log_mgf_atoms(std::span<const double> atoms, std::span<const double> weights, double t) {
    double shift = -std::numeric_limits<double>::infinity();
    for (double x : atoms) shift = std::max(shift, t * x);
    double acc = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) acc += weights[k] * std::exp(t * atoms[k] - shift);
    return shift + std::log(acc);
}

} // namespace detail

inline double mean(const IncrementDistribution& d) {
    return std::visit(Overloaded{
                          [](const Gaussian& g) { return g.mu; },
                          [](const Rademacher& r) { return 2.0 * r.p - 1.0; },
                          [&](const FiniteDiscrete&) {
                              double m = 0.0;
                              for (std::size_t k = 0; k < d.atoms().size(); ++k) m += d.atoms()[k] * d.weights()[k];
                              return m;
                          },
                      },
                      d.law());
}

/// Cumulant generating function K(t) = log E exp(tX).
inline double cgf(const IncrementDistribution& d, double t) {
    if (const auto* g = std::get_if<Gaussian>(&d.law())) return g->mu * t + 0.5 * g->sigma2 * t * t;
    return detail::log_mgf_atoms(d.atoms(), d.weights(), t);
}

/// (K'(t), K''(t)). For lattice laws these are the mean and variance under
/// the exponentially tilted weights w_k exp(t x_k - K(t)).
inline CgfDerivatives cgf_derivatives(const IncrementDistribution& d, double t) {
    if (const auto* g = std::get_if<Gaussian>(&d.law())) return {g->mu + g->sigma2 * t, g->sigma2};
    const auto atoms = d.atoms();
    const auto weights = d.weights();
    double shift = -std::numeric_limits<double>::infinity();
    for (double x : atoms) shift = std::max(shift, t * x);
    double z = 0.0;
    double m1 = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const double q = weights[k] * std::exp(t * atoms[k] - shift);
        z += q;
        m1 += q * atoms[k];
    }
    m1 /= z;
    double var = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const double q = weights[k] * std::exp(t * atoms[k] - shift) / z;
        const double dx = atoms[k] - m1;
        var += q * dx * dx;
    }
    return {m1, var};
}

/// One draw. Discrete laws use inverse-CDF on the sorted atoms.
inline double sample(const IncrementDistribution& d, RandomStream& rng) {
    if (const auto* g = std::get_if<Gaussian>(&d.law())) return g->mu + std::sqrt(g->sigma2) * rng.normal();
    const double u = rng.uniform();
    const auto it = std::upper_bound(d.cumulative_.begin(), d.cumulative_.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - d.cumulative_.begin()), d.atoms_.size() - 1);
    return d.atoms_[idx];
}

/// Exact P(X >= r) or P(X < r).
inline double tail_prob(const IncrementDistribution& d, double r, Side side) {
    if (const auto* g = std::get_if<Gaussian>(&d.law())) {
        const double z = (r - g->mu) / std::sqrt(2.0 * g->sigma2);
        return side == Side::ge ? 0.5 * std::erfc(z) : 0.5 * std::erfc(-z);
    }
    double ge = 0.0;
    double lt = 0.0;
    for (std::size_t k = 0; k < d.atoms().size(); ++k) (d.atoms()[k] >= r ? ge : lt) += d.weights()[k];
    return side == Side::ge ? ge : lt;
}

/// Essential infimum of the support.
inline ExtendedReal support_min(const IncrementDistribution& d) {
    return d.is_discrete() ? ExtendedReal(d.atoms().front()) : ExtendedReal::neg_infinity();
}

/// Essential supremum of the support.
inline ExtendedReal support_max(const IncrementDistribution& d) {
    return d.is_discrete() ? ExtendedReal(d.atoms().back()) : ExtendedReal::infinity();
}

/// P(X = x); zero for the Gaussian family.
inline double atom_mass(const IncrementDistribution& d, double x) {
    for (std::size_t k = 0; k < d.atoms().size(); ++k)
        if (d.atoms()[k] == x) return d.weights()[k];
    return 0.0;
}

} // namespace histwalk
