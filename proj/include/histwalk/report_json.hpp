#pragma once

// JSON serialization of reports. Infinite extended reals are written as the
// strings "inf" / "-inf", absent values as null. Key order is fixed, so a
// report is a pure function of its inputs and byte-identical across runs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "histwalk/config.hpp"
#include "histwalk/distributions.hpp"
#include "histwalk/experiments.hpp"
#include "histwalk/extended_real.hpp"
#include "histwalk/model.hpp"
#include "histwalk/stats.hpp"
#include "histwalk/theory.hpp"

namespace histwalk {

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson to_json(ExtendedReal x) {
    if (x.is_finite()) return x.value();
    return x.is_pos_infinity() ? "inf" : "-inf";
}

template <class T>
OrderedJson to_json_opt(const std::optional<T>& x) {
    if (!x) return nullptr;
    if constexpr (std::is_same_v<T, ExtendedReal>)
        return to_json(*x);
    else
        return *x;
}

inline OrderedJson to_json(const IncrementDistribution& d) {
    return std::visit(Overloaded{
                          [](const Gaussian& g) { return OrderedJson{{"kind", "gaussian"}, {"mu", g.mu}, {"sigma2", g.sigma2}}; },
                          [](const Rademacher& r) { return OrderedJson{{"kind", "rademacher"}, {"p", r.p}}; },
                          [](const FiniteDiscrete& f) { return OrderedJson{{"kind", "discrete"}, {"atoms", f.atoms}, {"weights", f.weights}}; },
                      },
                      d.law());
}

inline OrderedJson to_json(const ModelSpec& spec) {
    OrderedJson dists = OrderedJson::array();
    for (const auto& d : spec.dists) dists.push_back(to_json(d));
    return {{"dists", dists}, {"thresholds", spec.thresholds}, {"window", spec.window}, {"initial_regime", spec.initial_regime}};
}

inline OrderedJson to_json(const AssumptionCheck& c) {
    OrderedJson v = OrderedJson::array();
    for (const auto& x : c.violations) v.push_back({{"index", x.index}, {"message", x.message}});
    OrderedJson j{{"name", c.name}, {"passed", c.passed}, {"violations", v}};
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

inline OrderedJson to_json(const ValidationReport& r) {
    return {{"passed", r.passed()}, {"assumptions", {to_json(r.a), to_json(r.b), to_json(r.c)}}};
}

inline OrderedJson to_json(const TheoryReport& r) {
    OrderedJson lambdas = OrderedJson::array();
    for (const auto& x : r.lambdas) lambdas.push_back(to_json(x));
    OrderedJson up = OrderedJson::array(), down = OrderedJson::array(), soj = OrderedJson::array(), nu = OrderedJson::array();
    for (const auto& p : r.per_regime) {
        up.push_back(to_json_opt(p.up_exp));
        down.push_back(to_json_opt(p.down_exp));
        soj.push_back(to_json(p.sojourn_exp));
        nu.push_back(to_json(p.nu_exp));
    }
    return {{"lambdas", lambdas},
            {"means", r.means},
            {"argmax", r.prediction.argmax_set},
            {"predicted_regime", to_json_opt(r.prediction.regime)},
            {"predicted_speed", to_json_opt(r.prediction.speed)},
            {"tie_tol", r.tie_tol},
            {"per_regime", {{"up_exp", up}, {"down_exp", down}, {"sojourn_exp", soj}, {"nu_exp", nu}}},
            {"warnings", r.warnings}};
}

inline OrderedJson to_json(const GridPoint& g) {
    return {{"n", g.n}, {"estimate", g.estimate}, {"stderr", g.stderr_}, {"hits", g.hits}, {"samples", g.samples}};
}

inline OrderedJson to_json(const SlopeFit& f) {
    OrderedJson grid = OrderedJson::array();
    for (const auto& g : f.grid) grid.push_back(to_json(g));
    OrderedJson j{{"grid", grid}, {"dropped", f.dropped}, {"degenerate", f.degenerate}};
    if (f.degenerate) {
        j["slope"] = nullptr;
        j["slope_stderr"] = nullptr;
        j["intercept"] = nullptr;
    } else {
        j["slope"] = f.slope;
        j["slope_stderr"] = f.slope_stderr;
        j["intercept"] = f.intercept;
    }
    j["conservative_slope"] = to_json_opt(f.conservative_slope);
    return j;
}

inline OrderedJson to_json(const RegimeStats& s) {
    return {{"completed", s.completed},
            {"insufficient", s.insufficient},
            {"mean_sojourn", s.mean_sojourn},
            {"sojourn_stderr", s.sojourn_stderr},
            {"mean_displacement", s.mean_displacement},
            {"displacement_stderr", s.displacement_stderr},
            {"exit_up_fraction", s.exit_up_fraction},
            {"exit_down_fraction", s.exit_down_fraction},
            {"wald_residual", s.wald_residual},
            {"wald_stderr", s.wald_stderr}};
}

inline OrderedJson to_json(const SimReport& r) {
    OrderedJson per = OrderedJson::array();
    for (const auto& s : r.per_regime) per.push_back(to_json(s));
    OrderedJson p_up = OrderedJson::array(), p_down = OrderedJson::array();
    for (const auto& p : r.p_up) p_up.push_back(to_json_opt(p));
    for (const auto& p : r.p_down) p_down.push_back(to_json_opt(p));
    return {{"version", to_string(r.version)},
            {"N", r.window},
            {"steps", r.steps},
            {"replicas", r.replicas},
            {"batches", r.batches},
            {"master_seed", r.master_seed},
            {"est_speed", r.est_speed},
            {"est_speed_stderr", r.est_speed_stderr},
            {"replica_speeds", r.replica_speeds},
            {"regime_occupancy", r.occupancy},
            {"switch_frequencies", r.switch_frequencies},
            {"completed_sojourns", r.completed_sojourns},
            {"per_regime", per},
            {"p_up", p_up},
            {"p_down", p_down},
            {"reconstructed_speed", to_json_opt(r.reconstructed_speed)},
            {"reconstructed_stderr", r.reconstructed_stderr},
            {"warnings", r.warnings}};
}

inline OrderedJson to_json(const SweepResult& s) {
    OrderedJson rows = OrderedJson::array();
    for (const auto& row : s.rows)
        rows.push_back({{"N", row.window},
                        {"steps", row.steps},
                        {"cap_binding", row.cap_binding},
                        {"gap", row.gap},
                        {"gap_stderr", row.gap_stderr},
                        {"report", to_json(row.report)}});
    return {{"predicted_regime", to_json_opt(s.prediction.regime)},
            {"predicted_speed", to_json_opt(s.prediction.speed)},
            {"rows", rows},
            {"verdict",
             {{"gap_at_largest", s.gap_at_largest}, {"gaps_non_increasing", s.gaps_non_increasing}, {"noise_z", s.noise_z}, {"note", s.note}}}};
}

inline OrderedJson to_json(const BlockExponentReport& r) {
    OrderedJson counts = OrderedJson::array();
    for (std::size_t k = 0; k < r.counts.size(); ++k) {
        const auto& c = r.counts[k];
        counts.push_back({{"N", r.n_grid[k]}, {"plus1", c.plus1}, {"minus1", c.minus1}, {"minus11", c.minus11}, {"zero", c.zero}});
    }
    return {{"counts", counts},
            {"plus1", to_json(r.plus1)},
            {"minus1", to_json(r.minus1)},
            {"minus11", to_json(r.minus11)},
            {"target_plus1", r.target_plus1},
            {"target_minus1", r.target_minus1},
            {"bound_minus11", r.bound_minus11}};
}

inline OrderedJson to_json(const ExitStatsReport& r) {
    OrderedJson pts = OrderedJson::array();
    for (const auto& p : r.points)
        pts.push_back({{"N", p.window},
                       {"samples", p.samples},
                       {"censored", p.censored},
                       {"censored_fraction", p.censored_fraction()},
                       {"exits_up", p.exits_up},
                       {"exits_down", p.exits_down},
                       {"mean_tau", p.mean_tau},
                       {"tau_stderr", p.tau_stderr},
                       {"mean_displacement", p.mean_displacement},
                       {"wald_residual", p.wald_residual},
                       {"wald_stderr", p.wald_stderr}});
    return {{"points", pts},
            {"exit_down", r.exit_down ? to_json(*r.exit_down) : OrderedJson(nullptr)},
            {"tau", to_json(r.tau)},
            {"target_exit_down", to_json(ExtendedReal(r.target_exit_down))},
            {"target_tau", to_json(ExtendedReal(r.target_tau))},
            {"max_censored_fraction", r.max_censored_fraction}};
}

inline OrderedJson to_json(const PersistenceEstimate& p) {
    OrderedJson curve = OrderedJson::array();
    for (const auto& [h, v] : p.curve) curve.push_back({{"horizon", h}, {"estimate", v}});
    return {{"horizon", p.horizon}, {"samples", p.samples}, {"survivors", p.survivors}, {"estimate", p.estimate}, {"stderr", p.stderr_}, {"curve", curve}};
}

/// Writes `text` to `path` through a sibling temporary file and a rename,
/// so readers never observe a partial file.
inline void write_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out << text;
        out.flush();
        if (!out) throw Error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, target);
}

} // namespace histwalk
