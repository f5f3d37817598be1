#pragma once

// Exact discrete-time engines for the walk reinforced by its last N steps.
//
// Both versions start with N increments from P_{i_0}. At every later time
// the walk looks at the average of its last N increments; below r_i it
// moves to regime i-1, at or above r_{i+1} to regime i+1, otherwise it
// stays. The decision is taken before the increment of that time is drawn,
// and the increment comes from the post-decision regime. The delayed
// version only applies the rule once the current regime has been used for
// N consecutive steps.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "histwalk/distributions.hpp"
#include "histwalk/errors.hpp"
#include "histwalk/extended_real.hpp"
#include "histwalk/model.hpp"
#include "histwalk/random.hpp"

namespace histwalk {

enum class Version { delayed, instantaneous };

inline const char* to_string(Version v) { return v == Version::delayed ? "delayed" : "instantaneous"; }

/// Fixed-capacity ring of the most recent increments with a rolling sum.
/// The sum is recomputed exactly every 2^20 pushes to bound drift.
class Window {
public:
    static constexpr std::uint64_t kResumPeriod = std::uint64_t{1} << 20;

    explicit Window(int capacity = 1) : buf_(static_cast<std::size_t>(capacity), 0.0) {}

    void push(double x) {
        if (size_ < buf_.size()) {
            buf_[size_++] = x; // head_ stays 0 while filling
            sum_ += x;
        } else {
            sum_ += x - buf_[head_];
            buf_[head_] = x;
            if (++head_ == buf_.size()) head_ = 0;
        }
        if (++pushes_ % kResumPeriod == 0) resum();
    }

    void resum() {
        double s = 0.0;
        for (std::size_t k = 0; k < size_; ++k) s += buf_[(head_ + k) % buf_.size()];
        sum_ = s;
    }

    [[nodiscard]] double sum() const { return sum_; }
    [[nodiscard]] double exact_sum() const {
        double s = 0.0;
        for (std::size_t k = 0; k < size_; ++k) s += buf_[(head_ + k) % buf_.size()];
        return s;
    }
    [[nodiscard]] double average() const { return sum_ / static_cast<double>(buf_.size()); }
    [[nodiscard]] bool full() const { return size_ == buf_.size(); }
    [[nodiscard]] std::size_t capacity() const { return buf_.size(); }

private:
    std::vector<double> buf_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
    double sum_ = 0.0;
    std::uint64_t pushes_ = 0;
};

enum class Direction { up, down };

inline const char* to_string(Direction d) { return d == Direction::up ? "up" : "down"; }

/// One maximal stretch of steps spent in a regime. `steps` counts the
/// increments drawn there (tau + N for the delayed walk), `displacement`
/// their sum. The last sojourn of a finite run is censored and has no exit.
struct SojournRecord {
    int regime = 0;
    std::int64_t steps = 0;
    double displacement = 0.0;
    std::optional<Direction> exit_direction;
    bool censored = false;
};

/// Live walk state.
struct WalkState {
    double position = 0.0;
    std::int64_t time = 0;
    int regime = 0;
    std::int64_t consecutive_uses = 0;
    Window window;
    std::int64_t sojourn_start_time = 0;
    double sojourn_start_position = 0.0;

    [[nodiscard]] double window_average() const { return window.average(); }
};

/// Initial state driven by an arbitrary increment source draw(regime).
template <class Draw>
WalkState init_with(const ModelSpec& spec, Draw&& draw) {
    WalkState s;
    s.window = Window(spec.window);
    s.regime = spec.initial_regime;
    for (int k = 0; k < spec.window; ++k) {
        const double x = draw(s.regime);
        s.position += x;
        s.window.push(x);
    }
    s.time = spec.window;
    s.consecutive_uses = spec.window;
    return s;
}

/// Draws the first N increments from P_{i_0}.
inline WalkState init(const ModelSpec& spec, RandomStream& rng) {
    return init_with(spec, [&](int i) { return sample(spec.dists[i], rng); });
}

/// Advances one step with increments from draw(regime). Returns the record
/// of the sojourn that ended at this step, if the regime changed.
template <class Draw>
std::optional<SojournRecord> advance(WalkState& s, const ModelSpec& spec, Version version, Draw&& draw) {
    std::optional<SojournRecord> finished;
    if (version == Version::instantaneous || s.consecutive_uses >= spec.window) {
        const double avg = s.window.average();
        const int i = s.regime;
        std::optional<Direction> dir;
        if (i > 0 && avg < spec.thresholds[i - 1])
            dir = Direction::down;
        else if (i < spec.levels() && avg >= spec.thresholds[i])
            dir = Direction::up;
        if (dir) {
            finished = SojournRecord{i, s.time - s.sojourn_start_time, s.position - s.sojourn_start_position, dir, false};
            s.regime = *dir == Direction::up ? i + 1 : i - 1;
            s.consecutive_uses = 0;
            s.sojourn_start_time = s.time;
            s.sojourn_start_position = s.position;
        }
    }
    const double x = draw(s.regime);
    s.position += x;
    s.window.push(x);
    ++s.time;
    ++s.consecutive_uses;
    return finished;
}

inline std::optional<SojournRecord> step_delayed(WalkState& s, const ModelSpec& spec, RandomStream& rng) {
    return advance(s, spec, Version::delayed, [&](int i) { return sample(spec.dists[i], rng); });
}

inline std::optional<SojournRecord> step_instantaneous(WalkState& s, const ModelSpec& spec, RandomStream& rng) {
    return advance(s, spec, Version::instantaneous, [&](int i) { return sample(spec.dists[i], rng); });
}

/// Regimes visited in order, with one sojourn record per visit.
struct RegimePath {
    std::vector<int> regimes;
    std::vector<SojournRecord> sojourns;
};

struct Checkpoint {
    std::int64_t n = 0;
    double position = 0.0;
    int regime = 0;
    double window_average = 0.0;
};

struct RunOptions {
    int batches = 32;           // equal time batches for batch-means errors
    bool keep_checkpoints = true; // X_n at n = N, 2N, 4N, ... and the final time
};

struct RunResult {
    WalkState final_state;
    RegimePath path;
    std::vector<Checkpoint> checkpoints;
    std::vector<double> batch_speeds; // (X_{(b+1)L} - X_{bL}) / L
};

/// Runs the walk up to time `steps` (the initial N steps included).
template <class Draw>
RunResult run_with(const ModelSpec& spec, Version version, std::int64_t steps, Draw&& draw, const RunOptions& opt = {}) {
    if (steps < 1) throw InvalidInput("run: steps must be >= 1");
    RunResult out;
    const std::int64_t batch_len = opt.batches > 0 ? steps / opt.batches : 0;
    std::int64_t next_batch = batch_len > 0 ? batch_len : -1;
    double batch_start = 0.0;
    std::int64_t next_checkpoint = spec.window;

    // Batch boundaries and checkpoints that fall inside the initial block
    // are taken once init has finished.
    WalkState s = init_with(spec, draw);
    out.path.regimes.push_back(s.regime);
    auto observe = [&] {
        while (next_batch > 0 && s.time >= next_batch && static_cast<int>(out.batch_speeds.size()) < opt.batches) {
            out.batch_speeds.push_back((s.position - batch_start) / static_cast<double>(batch_len));
            batch_start = s.position;
            next_batch += batch_len;
        }
        if (opt.keep_checkpoints && s.time >= next_checkpoint) {
            out.checkpoints.push_back({s.time, s.position, s.regime, s.window_average()});
            while (next_checkpoint <= s.time) next_checkpoint *= 2;
        }
    };
    observe();
    while (s.time < steps) {
        if (auto rec = advance(s, spec, version, draw)) {
            out.path.sojourns.push_back(*rec);
            out.path.regimes.push_back(s.regime);
        }
        observe();
    }
    if (opt.keep_checkpoints && (out.checkpoints.empty() || out.checkpoints.back().n != s.time))
        out.checkpoints.push_back({s.time, s.position, s.regime, s.window_average()});
    out.path.sojourns.push_back(
        SojournRecord{s.regime, s.time - s.sojourn_start_time, s.position - s.sojourn_start_position, std::nullopt, true});
    out.final_state = std::move(s);
    return out;
}

inline RunResult run(const ModelSpec& spec, Version version, std::int64_t steps, RandomStream& rng, const RunOptions& opt = {}) {
    return run_with(spec, version, steps, [&](int i) { return sample(spec.dists[i], rng); }, opt);
}

/// Classification of one block of N overlapping windows.
enum class BlockOutcome { plus1, minus1, minus11, zero };

inline const char* to_string(BlockOutcome b) {
    switch (b) {
    case BlockOutcome::plus1: return "plus1";
    case BlockOutcome::minus1: return "minus1";
    case BlockOutcome::minus11: return "minus11";
    case BlockOutcome::zero: return "zero";
    }
    return "?";
}

/// Draws 2N-1 increments and classifies the N window means
/// S_{j,j+N}/N, j = 0..N-1, against [r_lo, r_hi):
///   max >= r_hi, min >= r_lo -> plus1;   max < r_hi, min < r_lo -> minus1;
///   max >= r_hi, min <  r_lo -> minus11; otherwise zero.
/// `scratch` is reused between calls.
inline BlockOutcome sample_block_Z(const IncrementDistribution& d, ExtendedReal r_lo, ExtendedReal r_hi, int N, RandomStream& rng,
                                   std::vector<double>& scratch) {
    if (N < 1) throw InvalidInput("sample_block_Z: N must be >= 1");
    if (!(r_lo < r_hi)) throw InvalidInput("sample_block_Z: need r_lo < r_hi");
    scratch.resize(static_cast<std::size_t>(2 * N - 1));
    for (auto& x : scratch) x = sample(d, rng);
    double s = 0.0;
    for (int k = 0; k < N; ++k) s += scratch[k];
    double hi = s / N;
    double lo = hi;
    for (int j = 1; j < N; ++j) {
        s += scratch[j + N - 1] - scratch[j - 1];
        const double m = s / N;
        hi = std::max(hi, m);
        lo = std::min(lo, m);
    }
    const bool above = ExtendedReal(hi) >= r_hi;
    const bool below = ExtendedReal(lo) < r_lo;
    if (above) return below ? BlockOutcome::minus11 : BlockOutcome::plus1;
    return below ? BlockOutcome::minus1 : BlockOutcome::zero;
}

inline BlockOutcome sample_block_Z(const IncrementDistribution& d, ExtendedReal r_lo, ExtendedReal r_hi, int N, RandomStream& rng) {
    std::vector<double> scratch;
    return sample_block_Z(d, r_lo, r_hi, N, rng, scratch);
}

/// Runs a fresh walk with law d and stops at
///   tau = inf{ n >= 0 : S_{n,n+N}/N not in [r_lo, r_hi) },
/// returning steps = tau + N, displacement S_{tau+N} and the side crossed.
/// If tau + N would exceed `cap` the record is censored.
inline SojournRecord sample_exit(const IncrementDistribution& d, ExtendedReal r_lo, ExtendedReal r_hi, int N, RandomStream& rng,
                                 std::int64_t cap, int regime = 0) {
    if (N < 1) throw InvalidInput("sample_exit: N must be >= 1");
    if (cap < N) throw InvalidInput("sample_exit: cap must be >= N");
    if (!(r_lo < r_hi)) throw InvalidInput("sample_exit: need r_lo < r_hi");
    Window w(N);
    double pos = 0.0;
    for (int k = 0; k < N; ++k) {
        const double x = sample(d, rng);
        pos += x;
        w.push(x);
    }
    std::int64_t steps = N;
    for (;;) {
        const double avg = w.average();
        if (ExtendedReal(avg) < r_lo) return {regime, steps, pos, Direction::down, false};
        if (ExtendedReal(avg) >= r_hi) return {regime, steps, pos, Direction::up, false};
        if (steps >= cap) return {regime, steps, pos, std::nullopt, true};
        const double x = sample(d, rng);
        pos += x;
        w.push(x);
        ++steps;
    }
}

} // namespace histwalk
