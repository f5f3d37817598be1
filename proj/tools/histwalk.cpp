// histwalk: command-line front end.
//
// Exit codes: 0 success, 1 domain failure (assumptions, invalid model,
// non-convergence), 2 usage or config parse error, 3 budget exceeded
// (censoring, degenerate estimates, binding step cap).

#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "histwalk/histwalk.hpp"

using namespace histwalk;

namespace {

enum Exit { kOk = 0, kDomain = 1, kUsage = 2, kBudget = 3 };

class UsageError : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

std::string num(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        int v = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) throw UsageError("bad integer list '" + s + "'");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty integer list");
    return out;
}

/// lo:hi:step, inclusive of hi up to rounding.
std::vector<double> parse_range(const std::string& s) {
    std::vector<double> parts;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ':')) {
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) throw UsageError("bad range '" + s + "'");
        parts.push_back(v);
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) throw UsageError("range must be lo:hi:step with step > 0 and hi >= lo");
    const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
    std::vector<double> out;
    for (long k = 0; k < count; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[2]);
    return out;
}

void emit(const std::optional<std::string>& path, const std::string& text) {
    if (path)
        write_atomic(*path, text);
    else
        std::cout << text;
}

std::string dump(const OrderedJson& j) { return j.dump(2) + "\n"; }

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    std::optional<unsigned> threads;
};

std::uint64_t require_seed(const Common& c, const Config& cfg) {
    if (c.seed) return *c.seed;
    if (cfg.run.seed) return *cfg.run.seed;
    throw UsageError("a seed is required: pass --seed or set run.seed in the config");
}

std::optional<std::string> output_path(const Common& c, const Config& cfg) { return c.output ? c.output : cfg.run.output; }

unsigned threads_of(const Common& c, const Config& cfg) { return c.threads.value_or(cfg.run.threads.value_or(0)); }

const IncrementDistribution& dist_at(const Config& cfg, int i) {
    if (i < 0 || i > cfg.model.levels()) throw UsageError("regime index out of range [0, l]");
    return cfg.model.dists[i];
}

int run_validate(const Common& c) {
    const Config cfg = load_config(c.config);
    const auto rep = validate(cfg.model);
    emit(c.output, dump(to_json(rep)));
    return rep.passed() ? kOk : kDomain;
}

int run_predict(const Common& c, std::optional<double> tie_tol) {
    const Config cfg = load_config(c.config);
    const auto check = validate(cfg.model);
    if (!check.passed()) {
        std::cerr << dump(to_json(check));
        return kDomain;
    }
    const auto rep = analyze(cfg.model, tie_tol.value_or(cfg.run.tie_tol.value_or(kDefaultTieTolerance)));
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    emit(output_path(c, cfg), dump(to_json(rep)));
    return kOk;
}

struct SimulateFlags {
    std::optional<std::string> version;
    std::optional<std::int64_t> steps;
    std::optional<int> replicas;
    std::optional<int> window;
    std::optional<std::string> trace;
};

int run_simulate(const Common& c, const SimulateFlags& f) {
    Config cfg = load_config(c.config);
    if (f.window) cfg.model.window = *f.window;
    cfg.model.check_structure();
    const Version version = parse_version(f.version.value_or(cfg.run.version ? to_string(*cfg.run.version) : "delayed"));
    const std::uint64_t seed = require_seed(c, cfg);
    const std::int64_t steps = f.steps.value_or(cfg.run.steps.value_or(1'000'000));
    const int replicas = f.replicas.value_or(cfg.run.replicas.value_or(4));
    const auto rep = estimate_speed(cfg.model, version, steps, replicas, seed, EstimateOptions{32, threads_of(c, cfg)});
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";

    if (const auto trace = f.trace ? f.trace : cfg.run.trace) {
        // Replica 0 again, this time with checkpoints.
        RandomStream rng(seed, 0);
        const auto res = run(cfg.model, version, steps, rng, RunOptions{32, true});
        std::string csv = "n,X_n,regime,window_avg\n";
        for (const auto& cp : res.checkpoints)
            csv += std::to_string(cp.n) + "," + num(cp.position) + "," + std::to_string(cp.regime) + "," + num(cp.window_average) + "\n";
        write_atomic(*trace, csv);
    }
    const auto out = output_path(c, cfg);
    emit(out, dump(to_json(rep)));
    if (out)
        std::cout << "N=" << rep.window << " version=" << to_string(version) << " est_speed=" << num(rep.est_speed)
                  << " stderr=" << num(rep.est_speed_stderr) << "\n";
    return kOk;
}

struct SweepFlags {
    std::optional<std::string> version;
    std::optional<std::string> n_grid;
    std::optional<int> replicas;
    StepsRule rule;
    std::optional<std::string> json;
};

int run_sweep(const Common& c, const SweepFlags& f) {
    const Config cfg = load_config(c.config);
    const Version version = parse_version(f.version.value_or(cfg.run.version ? to_string(*cfg.run.version) : "delayed"));
    const std::uint64_t seed = require_seed(c, cfg);
    const std::vector<int> grid = f.n_grid ? parse_int_list(*f.n_grid) : cfg.run.n_grid;
    if (grid.empty()) throw UsageError("sweep needs --n-grid or run.n_grid");
    const int replicas = f.replicas.value_or(cfg.run.replicas.value_or(4));
    const auto res = sweep_window(cfg.model, version, grid, f.rule, replicas, seed, EstimateOptions{32, threads_of(c, cfg)});

    const double limit = *res.prediction.speed;
    std::string csv = "N,est_speed,stderr,predicted_speed,gap\n";
    bool cap_binding = false;
    for (const auto& row : res.rows) {
        csv += std::to_string(row.window) + "," + num(row.report.est_speed) + "," + num(row.report.est_speed_stderr) + "," + num(limit) + "," +
               num(row.gap) + "\n";
        cap_binding = cap_binding || row.cap_binding;
        if (row.cap_binding) std::cerr << "warning: step cap binding at N=" << row.window << "\n";
    }
    const auto out = output_path(c, cfg);
    emit(out, csv);
    if (f.json) write_atomic(*f.json, dump(to_json(res)));
    if (out) {
        for (const auto& row : res.rows)
            std::cout << "N=" << row.window << " steps=" << row.steps << " est_speed=" << num(row.report.est_speed)
                      << " stderr=" << num(row.report.est_speed_stderr) << " gap=" << num(row.gap) << "\n";
        std::cout << "verdict: gap_at_largest=" << num(res.gap_at_largest)
                  << " non_increasing=" << (res.gaps_non_increasing ? "yes" : "no") << " (" << res.note << ")\n";
    }
    if (cap_binding) throw BudgetExceeded("step cap binding for part of the grid; shrink the grid or raise the cap");
    return kOk;
}

int run_ratefn(const Common& c, int dist, const std::string& r_grid) {
    const Config cfg = load_config(c.config);
    const RateFunction rf(dist_at(cfg, dist));
    std::string csv = "r,I_of_r,lambda_star\n";
    for (double r : parse_range(r_grid)) {
        const auto sol = rf.solve(r);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", r);
        csv += std::string(buf) + "," + sol.value.to_string() + "," + sol.lambda_star.to_string() + "\n";
    }
    emit(output_path(c, cfg), csv);
    return kOk;
}

struct RegimeFlags {
    int regime = 0;
    std::optional<std::string> n_grid;
    std::optional<std::uint64_t> samples;
    std::optional<std::int64_t> cap;
};

int run_blocks(const Common& c, const RegimeFlags& f) {
    const Config cfg = load_config(c.config);
    const auto& d = dist_at(cfg, f.regime);
    const ExtendedReal lo = cfg.model.lower_threshold(f.regime);
    const ExtendedReal hi = cfg.model.upper_threshold(f.regime);
    if (!lo.is_finite() || !hi.is_finite()) throw InvalidInput("blocks needs an interior regime with two finite thresholds");
    const std::vector<int> grid = f.n_grid ? parse_int_list(*f.n_grid) : cfg.run.n_grid;
    const std::uint64_t samples = f.samples.value_or(cfg.run.samples.value_or(1'000'000));
    const auto rep = fit_block_exponents(d, lo.value(), hi.value(), grid, samples, require_seed(c, cfg), threads_of(c, cfg));
    const auto out = output_path(c, cfg);
    emit(out, dump(to_json(rep)));
    if (out)
        for (std::size_t k = 0; k < rep.counts.size(); ++k)
            std::cout << "N=" << rep.n_grid[k] << " plus1=" << rep.counts[k].plus1 << " minus1=" << rep.counts[k].minus1
                      << " minus11=" << rep.counts[k].minus11 << " zero=" << rep.counts[k].zero << "\n";
    return kOk;
}

int run_exits(const Common& c, const RegimeFlags& f) {
    const Config cfg = load_config(c.config);
    const auto& d = dist_at(cfg, f.regime);
    const std::vector<int> grid = f.n_grid ? parse_int_list(*f.n_grid) : cfg.run.n_grid;
    const std::uint64_t samples = f.samples.value_or(cfg.run.samples.value_or(10'000));
    const std::int64_t cap = f.cap.value_or(cfg.run.cap.value_or(10'000'000));
    const auto rep = fit_exit_statistics(d, cfg.model.lower_threshold(f.regime), cfg.model.upper_threshold(f.regime), grid, samples, cap,
                                         require_seed(c, cfg), threads_of(c, cfg));
    const auto out = output_path(c, cfg);
    emit(out, dump(to_json(rep)));
    if (out)
        for (const auto& p : rep.points)
            std::cout << "N=" << p.window << " exits_up=" << p.exits_up << " exits_down=" << p.exits_down << " mean_tau=" << num(p.mean_tau)
                      << " censored=" << p.censored << "\n";
    return kOk;
}

int run_persistence(const Common& c, int regime, std::optional<double> r, std::optional<int> horizon, std::optional<std::uint64_t> samples) {
    const Config cfg = load_config(c.config);
    const auto& d = dist_at(cfg, regime);
    if (!r) {
        const ExtendedReal lo = cfg.model.lower_threshold(regime);
        if (!lo.is_finite()) throw UsageError("--r is required for regime 0");
        r = lo.value();
    }
    const auto est = estimate_persistence_constant(d, *r, horizon.value_or(cfg.run.horizon.value_or(10'000)),
                                                   samples.value_or(cfg.run.samples.value_or(100'000)), require_seed(c, cfg), threads_of(c, cfg));
    const auto out = output_path(c, cfg);
    emit(out, dump(to_json(est)));
    if (out)
        for (const auto& [h, v] : est.curve) std::cout << "horizon=" << h << " estimate=" << num(v) << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and large-deviation predictions for random walks reinforced by their recent history"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub, bool stochastic) {
        sub->add_option("config", common.config, "JSON config file")->required();
        sub->add_option("-o,--output", common.output, "write the report here (atomically) instead of stdout");
        if (stochastic) {
            sub->add_option("--seed", common.seed, "master seed (required, here or as run.seed)");
            sub->add_option("--threads", common.threads, "worker threads (0 = hardware concurrency)");
        }
    };

    auto* validate_cmd = app.add_subcommand("validate", "check the modelling assumptions");
    add_common(validate_cmd, false);

    std::optional<double> tie_tol;
    auto* predict_cmd = app.add_subcommand("predict", "exponents and limiting speed");
    add_common(predict_cmd, false);
    predict_cmd->add_option("--tie-tol", tie_tol, "absolute tolerance for ties between exponents");

    SimulateFlags sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "estimate the speed by long runs");
    add_common(simulate_cmd, true);
    simulate_cmd->add_option("--version", sim.version, "delayed | instantaneous");
    simulate_cmd->add_option("--steps", sim.steps, "steps per replica");
    simulate_cmd->add_option("--replicas", sim.replicas, "independent replicas (>= 2)");
    simulate_cmd->add_option("--window", sim.window, "override model.window");
    simulate_cmd->add_option("--trace", sim.trace, "CSV trace of replica 0 at geometric checkpoints");

    SweepFlags sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "speed against the predicted limit over a window grid");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--version", sweep.version, "delayed | instantaneous");
    sweep_cmd->add_option("--n-grid", sweep.n_grid, "comma-separated windows, e.g. 10,20,40");
    sweep_cmd->add_option("--replicas", sweep.replicas, "replicas per window");
    sweep_cmd->add_option("--min-steps", sweep.rule.min_steps, "lower bound of the steps rule");
    sweep_cmd->add_option("--steps-multiplier", sweep.rule.multiplier, "multiplier of exp(N * max sojourn exponent)");
    sweep_cmd->add_option("--steps-cap", sweep.rule.cap, "upper bound of the steps rule");
    sweep_cmd->add_option("--json", sweep.json, "also write the full JSON report here");

    int dist = 0;
    std::string r_grid;
    auto* ratefn_cmd = app.add_subcommand("ratefn", "tabulate a rate function");
    add_common(ratefn_cmd, false);
    ratefn_cmd->add_option("--dist", dist, "distribution index")->required();
    ratefn_cmd->add_option("--r-grid", r_grid, "lo:hi:step")->required();

    RegimeFlags regime_flags;
    auto* blocks_cmd = app.add_subcommand("blocks", "block-variable exponent fits for one regime");
    add_common(blocks_cmd, true);
    blocks_cmd->add_option("--regime", regime_flags.regime, "interior regime index")->required();
    blocks_cmd->add_option("--n-grid", regime_flags.n_grid, "comma-separated windows");
    blocks_cmd->add_option("--samples", regime_flags.samples, "samples per window");

    auto* exits_cmd = app.add_subcommand("exits", "exit direction and exit time fits for one regime");
    add_common(exits_cmd, true);
    exits_cmd->add_option("--regime", regime_flags.regime, "regime index")->required();
    exits_cmd->add_option("--n-grid", regime_flags.n_grid, "comma-separated windows");
    exits_cmd->add_option("--samples", regime_flags.samples, "samples per window");
    exits_cmd->add_option("--cap", regime_flags.cap, "censoring cap on tau + N");

    int p_regime = 0;
    std::optional<double> p_r;
    std::optional<int> p_horizon;
    std::optional<std::uint64_t> p_samples;
    auto* persistence_cmd = app.add_subcommand("persistence", "probability that the running mean stays above r");
    add_common(persistence_cmd, true);
    persistence_cmd->add_option("--regime", p_regime, "distribution index")->required();
    persistence_cmd->add_option("--r", p_r, "level (default: the regime's lower threshold)");
    persistence_cmd->add_option("--horizon", p_horizon, "last n checked");
    persistence_cmd->add_option("--samples", p_samples, "Monte Carlo samples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*validate_cmd) return run_validate(common);
        if (*predict_cmd) return run_predict(common, tie_tol);
        if (*simulate_cmd) return run_simulate(common, sim);
        if (*sweep_cmd) return run_sweep(common, sweep);
        if (*ratefn_cmd) return run_ratefn(common, dist, r_grid);
        if (*blocks_cmd) return run_blocks(common, regime_flags);
        if (*exits_cmd) return run_exits(common, regime_flags);
        if (*persistence_cmd) return run_persistence(common, p_regime, p_r, p_horizon, p_samples);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ExcessCensoring& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kBudget;
    } catch (const DegenerateEstimate& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kBudget;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kBudget;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomain;
    }
    return kUsage;
}
