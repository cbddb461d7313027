#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dist.hpp"

namespace maxq {

struct SimulationCaps {
    std::uint64_t max_events = 10'000'000;
    std::uint64_t max_queue = 100'000;
    /// Stop as soon as the running maximum exceeds this value; 0 disables.
    /// The returned maximum is then only known to be > stop_above.
    std::uint64_t stop_above = 0;
    /// Push arriving batches one customer at a time instead of as one block.
    /// The maximum is the same either way; kept for checking that.
    bool sequential_batch_push = false;
};

struct BusyPeriodOutcome {
    enum class Kind { Completed, ExceededStop, Truncated };
    Kind kind = Kind::Completed;
    std::uint64_t maximum = 0;  // running maximum when the loop ended
    std::uint64_t events = 0;
};

/// Simulates one busy period event by event. The in-system population is a
/// stack; only its top customer is served. Exponential interarrival times are
/// redrawn at every service (re)start, which is exact by memorylessness.
BusyPeriodOutcome simulate_busy_period(const ModelConfig& config, RandomStream& rng,
                                       const SimulationCaps& caps);

struct SimulationOptions {
    SimulationCaps caps;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Empirical distribution of M over independent busy periods.
struct SimulationEstimate {
    int n_max = 0;
    std::uint64_t replications = 0;
    std::uint64_t seed = 0;
    std::uint64_t overflow_count = 0;  // truncated by the event or queue cap
    std::uint64_t above_count = 0;     // completed or stopped with M > n_max
    std::vector<std::uint64_t> counts; // counts[n] = #{M == n}, n = 0..n_max
    std::vector<double> cdf_hat;       // cdf_hat[n] = P(M <= n), n = 0..n_max
    std::vector<double> ci_halfwidth;  // 1.96 sqrt(p (1 - p) / n_eff)
    std::string config;

    /// Busy periods that enter the tallies: replications - overflow_count.
    std::uint64_t effective_replications() const { return replications - overflow_count; }
};

/// Replications are grouped in fixed blocks; block j draws from an mt19937_64
/// seeded by seed_seq{seed, j}. Results do not depend on the thread count.
SimulationEstimate estimate_cdf(const ModelConfig& config, int n_max, std::uint64_t replications,
                                std::uint64_t seed, const SimulationOptions& options = {});

/// `n,p_hat,ci_lo,ci_hi,count` with '#' metadata lines.
std::string estimate_to_csv(const SimulationEstimate& estimate);

inline constexpr std::uint64_t kReplicationBlock = 4096;

}  // namespace maxq
