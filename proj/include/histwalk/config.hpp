#pragma once

// JSON run configurations:
//
//   { "model": { "dists": [ {"kind": "gaussian", "mu": 0, "sigma2": 1}, ... ],
//                "thresholds": [0.4], "window": 20, "initial_regime": 0 },
//     "run":   { "version": "delayed", "steps": 1000000, ... } }
//
// Unknown keys are rejected at every level. See docs/schema.md.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "histwalk/distributions.hpp"
#include "histwalk/errors.hpp"
#include "histwalk/model.hpp"
#include "histwalk/simulator.hpp"

namespace histwalk {

using Json = nlohmann::json;

/// Malformed or schema-violating configuration text.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::optional<Version> version;
    std::optional<std::int64_t> steps;
    std::optional<int> replicas;
    std::optional<std::uint64_t> seed;
    std::vector<int> n_grid;
    std::optional<std::uint64_t> samples;
    std::optional<std::int64_t> cap;
    std::optional<double> tie_tol;
    std::optional<int> horizon;
    std::optional<unsigned> threads;
    std::optional<std::string> output;
    std::optional<std::string> trace;
};

struct Config {
    ModelSpec model;
    RunConfig run;
};

namespace detail {

inline void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T required(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

template <class T>
std::optional<T> optional_key(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return required<T>(obj, key, where);
}

inline IncrementDistribution parse_dist(const Json& j, const std::string& where) {
    const auto kind = required<std::string>(j, "kind", where);
    if (kind == "gaussian") {
        reject_unknown(j, {"kind", "mu", "sigma2"}, where);
        return IncrementDistribution::gaussian(required<double>(j, "mu", where), required<double>(j, "sigma2", where));
    }
    if (kind == "rademacher") {
        reject_unknown(j, {"kind", "p"}, where);
        return IncrementDistribution::rademacher(required<double>(j, "p", where));
    }
    if (kind == "discrete") {
        reject_unknown(j, {"kind", "atoms", "weights"}, where);
        return IncrementDistribution::finite_discrete(required<std::vector<double>>(j, "atoms", where),
                                                      required<std::vector<double>>(j, "weights", where));
    }
    throw ConfigError(where + ": unknown distribution kind '" + kind + "'");
}

} // namespace detail

inline Version parse_version(const std::string& s) {
    if (s == "delayed") return Version::delayed;
    if (s == "instantaneous") return Version::instantaneous;
    throw ConfigError("version must be 'delayed' or 'instantaneous', got '" + s + "'");
}

inline ModelSpec parse_model(const Json& j) {
    detail::reject_unknown(j, {"dists", "thresholds", "window", "initial_regime"}, "model");
    ModelSpec spec;
    const auto& dists = j.contains("dists") ? j.at("dists") : throw ConfigError("model: missing key 'dists'");
    if (!dists.is_array()) throw ConfigError("model.dists: expected an array");
    for (std::size_t k = 0; k < dists.size(); ++k) {
        try {
            spec.dists.push_back(detail::parse_dist(dists[k], "model.dists[" + std::to_string(k) + "]"));
        } catch (const InvalidInput& e) {
            throw ConfigError("model.dists[" + std::to_string(k) + "]: " + e.what());
        }
    }
    spec.thresholds = detail::required<std::vector<double>>(j, "thresholds", "model");
    spec.window = detail::required<int>(j, "window", "model");
    spec.initial_regime = detail::optional_key<int>(j, "initial_regime", "model").value_or(0);
    try {
        spec.check_structure();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

inline RunConfig parse_run(const Json& j) {
    detail::reject_unknown(j, {"version", "steps", "replicas", "seed", "n_grid", "samples", "cap", "tie_tol", "horizon", "threads", "output", "trace"},
                           "run");
    RunConfig rc;
    if (auto v = detail::optional_key<std::string>(j, "version", "run")) rc.version = parse_version(*v);
    rc.steps = detail::optional_key<std::int64_t>(j, "steps", "run");
    rc.replicas = detail::optional_key<int>(j, "replicas", "run");
    rc.seed = detail::optional_key<std::uint64_t>(j, "seed", "run");
    rc.n_grid = detail::optional_key<std::vector<int>>(j, "n_grid", "run").value_or(std::vector<int>{});
    rc.samples = detail::optional_key<std::uint64_t>(j, "samples", "run");
    rc.cap = detail::optional_key<std::int64_t>(j, "cap", "run");
    rc.tie_tol = detail::optional_key<double>(j, "tie_tol", "run");
    rc.horizon = detail::optional_key<int>(j, "horizon", "run");
    rc.threads = detail::optional_key<unsigned>(j, "threads", "run");
    rc.output = detail::optional_key<std::string>(j, "output", "run");
    rc.trace = detail::optional_key<std::string>(j, "trace", "run");
    return rc;
}

inline Config parse_config(const Json& j) {
    detail::reject_unknown(j, {"model", "run"}, "config");
    if (!j.contains("model")) throw ConfigError("config: missing key 'model'");
    Config c;
    c.model = parse_model(j.at("model"));
    if (j.contains("run")) c.run = parse_run(j.at("run"));
    return c;
}

inline Config parse_config_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace histwalk
