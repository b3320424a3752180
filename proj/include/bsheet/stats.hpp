#pragma once

#include <bsheet/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace bsheet {

/// Monte Carlo summary.
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::size_t censored = 0;
    std::uint64_t seed = 0;
    std::optional<std::string> warning;

    double censored_fraction() const noexcept {
        return n == 0 ? 0.0 : static_cast<double>(censored) / static_cast<double>(n);
    }

    /// (mean - target) / stderr; zero-variance estimates score 0 on an exact
    /// match and +-inf otherwise.
    double z_score(double target) const noexcept {
        const double diff = mean - target;
        if (std_error > 0.0) return diff / std_error;
        if (diff == 0.0) return 0.0;
        return diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }

    bool within(double target, double z_max) const noexcept { return std::abs(z_score(target)) <= z_max; }
};

/// Streaming mean/variance (Welford) with Chan's pairwise merge.
class RunningMoments {
public:
    void push(double x) noexcept {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    void merge(const RunningMoments& other) noexcept {
        if (other.count_ == 0) return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double total = static_cast<double>(count_ + other.count_);
        const double delta = other.mean_ - mean_;
        mean_ += delta * static_cast<double>(other.count_) / total;
        m2_ += other.m2_ + delta * delta * static_cast<double>(count_) * static_cast<double>(other.count_) / total;
        count_ += other.count_;
    }

    std::size_t count() const noexcept { return count_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
    double std_error() const noexcept {
        return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    }

private:
    std::size_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Worker count used when a caller passes 0.
inline unsigned default_workers() noexcept {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Evaluates body(r) for r in [0, n) across `workers` threads and returns the
/// results in replication order. Each replication owns its substream, so the
/// output is independent of the worker count.
template <typename Result, typename Body>
std::vector<Result> run_replications(std::size_t n, unsigned workers, Body&& body) {
    std::vector<Result> out(n);
    if (workers == 0) workers = default_workers();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t r = 0; r < n; ++r) out[r] = body(r);
        return out;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = w * chunk;
                const std::size_t hi = std::min(n, lo + chunk);
                for (std::size_t r = lo; r < hi; ++r) out[r] = body(r);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

/// Sequential reduction in replication order (bit-stable).
inline McEstimate summarize(std::span<const double> samples, std::size_t censored, std::uint64_t seed) {
    if (samples.size() < 2) throw ConfigError("Monte Carlo estimate needs at least two replications");
    RunningMoments moments;
    for (double x : samples) moments.push(x);
    McEstimate est;
    est.mean = moments.mean();
    est.std_error = moments.std_error();
    est.n = samples.size();
    est.censored = censored;
    est.seed = seed;
    return est;
}

}  // namespace bsheet
