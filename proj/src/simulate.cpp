#include "simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "analytic.hpp"
#include "errors.hpp"

namespace maxq {

namespace {

struct Customer {
    // Resume: remaining work. RepeatNoResample: the single drawn requirement.
    // RepeatResample: unused, a fresh requirement is drawn at every start.
    double work;
};

struct BlockTally {
    std::vector<std::uint64_t> counts;
    std::uint64_t above = 0;
    std::uint64_t overflow = 0;
};

}  // namespace

BusyPeriodOutcome simulate_busy_period(const ModelConfig& config, RandomStream& rng,
                                       const SimulationCaps& caps) {
    if (caps.max_events == 0 || caps.max_queue == 0)
        throw InvalidArgument("simulation caps must be positive");
    const Discipline discipline = config.discipline;
    const bool keeps_work = discipline != Discipline::RepeatResample;
    std::exponential_distribution<double> interarrival(config.lambda);

    std::vector<Customer> stack;
    BusyPeriodOutcome out;

    // Returns false once a cap or the stop threshold ends the period.
    const auto push_batch = [&](int size) {
        const int step = caps.sequential_batch_push ? 1 : size;
        for (int pushed = 0; pushed < size; pushed += step) {
            for (int i = 0; i < step; ++i)
                stack.push_back({keeps_work ? sample(config.service, rng) : 0.0});
            out.maximum = std::max<std::uint64_t>(out.maximum, stack.size());
            if (stack.size() > caps.max_queue) {
                out.kind = BusyPeriodOutcome::Kind::Truncated;
                return false;
            }
            if (caps.stop_above != 0 && out.maximum > caps.stop_above) {
                out.kind = BusyPeriodOutcome::Kind::ExceededStop;
                return false;
            }
        }
        return true;
    };

    if (!push_batch(sample_batch(config.batch, rng))) return out;
    while (!stack.empty()) {
        if (out.events >= caps.max_events) {
            out.kind = BusyPeriodOutcome::Kind::Truncated;
            return out;
        }
        ++out.events;
        Customer& top = stack.back();
        const double service = keeps_work ? top.work : sample(config.service, rng);
        const double next_arrival = interarrival(rng);
        if (next_arrival < service) {
            if (discipline == Discipline::Resume) top.work -= next_arrival;
            if (!push_batch(sample_batch(config.batch, rng))) return out;
        } else {
            stack.pop_back();
        }
    }
    out.kind = BusyPeriodOutcome::Kind::Completed;
    return out;
}

SimulationEstimate estimate_cdf(const ModelConfig& config, int n_max, std::uint64_t replications,
                                std::uint64_t seed, const SimulationOptions& options) {
    if (replications < 1) throw InvalidArgument("replications must be at least 1");
    if (n_max < 1) throw InvalidArgument("n_max must be at least 1");
    if (options.caps.max_events == 0 || options.caps.max_queue == 0)
        throw InvalidArgument("simulation caps must be positive");
    SimulationCaps caps = options.caps;
    caps.stop_above = static_cast<std::uint64_t>(n_max);

    const std::uint64_t blocks = (replications + kReplicationBlock - 1) / kReplicationBlock;
    std::vector<BlockTally> tallies(blocks);
    std::atomic<std::uint64_t> next_block{0};

    const auto worker = [&]() {
        for (std::uint64_t j = next_block++; j < blocks; j = next_block++) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(j >> 32)};
            RandomStream rng(seq);
            BlockTally& tally = tallies[j];
            tally.counts.assign(n_max + 1, 0);
            const std::uint64_t begin = j * kReplicationBlock;
            const std::uint64_t end = std::min(replications, begin + kReplicationBlock);
            for (std::uint64_t r = begin; r < end; ++r) {
                const auto outcome = simulate_busy_period(config, rng, caps);
                switch (outcome.kind) {
                    case BusyPeriodOutcome::Kind::Truncated: ++tally.overflow; break;
                    case BusyPeriodOutcome::Kind::ExceededStop: ++tally.above; break;
                    case BusyPeriodOutcome::Kind::Completed:
                        if (outcome.maximum > static_cast<std::uint64_t>(n_max))
                            ++tally.above;
                        else
                            ++tally.counts[outcome.maximum];
                        break;
                }
            }
        }
    };

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }

    SimulationEstimate est;
    est.n_max = n_max;
    est.replications = replications;
    est.seed = seed;
    est.config = config.describe();
    est.counts.assign(n_max + 1, 0);
    for (const auto& tally : tallies) {  // ordered reduction by block index
        for (int n = 0; n <= n_max; ++n) est.counts[n] += tally.counts[n];
        est.above_count += tally.above;
        est.overflow_count += tally.overflow;
    }
    const std::uint64_t n_eff = est.effective_replications();
    est.cdf_hat.assign(n_max + 1, 0.0);
    est.ci_halfwidth.assign(n_max + 1, 0.0);
    std::uint64_t running = 0;
    for (int n = 0; n <= n_max; ++n) {
        running += est.counts[n];
        if (n_eff == 0) continue;
        const double p = static_cast<double>(running) / static_cast<double>(n_eff);
        est.cdf_hat[n] = p;
        est.ci_halfwidth[n] = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n_eff));
    }
    return est;
}

std::string estimate_to_csv(const SimulationEstimate& e) {
    std::string out;
    out += "# config " + e.config + "\n";
    out += "# seed=" + std::to_string(e.seed) + " replications=" + std::to_string(e.replications) +
           " overflow_count=" + std::to_string(e.overflow_count) +
           " above_n_max=" + std::to_string(e.above_count) + "\n";
    out += "n,p_hat,ci_lo,ci_hi,count\n";
    for (int n = 1; n <= e.n_max; ++n) {
        const double lo = std::max(0.0, e.cdf_hat[n] - e.ci_halfwidth[n]);
        const double hi = std::min(1.0, e.cdf_hat[n] + e.ci_halfwidth[n]);
        out += std::to_string(n) + ',' + format_sig12(e.cdf_hat[n]) + ',' + format_sig12(lo) + ',' +
               format_sig12(hi) + ',' + std::to_string(e.counts[n]) + '\n';
    }
    return out;
}

}  // namespace maxq
