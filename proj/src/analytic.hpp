#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dist.hpp"

namespace maxq {

/// P(k, b) = P(M(k) <= b) for 0 <= k <= b <= b_max, where M(k) is the busy-period
/// maximum started by k customers, and the marginal P(b) = P(M <= b).
struct CdfTable {
    int b_max = 0;
    Discipline discipline = Discipline::Resume;
    std::string config;     // ModelConfig::describe() of the source model
    bool defective = false; // unstable model: P(b) need not approach 1
    std::vector<double> marginal;          // index b = 0..b_max
    std::vector<std::vector<double>> rows; // rows[b][k], k = 0..b

    /// Boundary conventions included: p(0, b) = 1, p(k, b) = 0 for k > b.
    double p(int k, int b) const;
};

struct StabilityReport {
    Discipline discipline = Discipline::Resume;
    double effective_mean_service = 0.0;  // +inf when E exp(lambda S) diverges
    double offered_load = 0.0;            // lambda * mu * E S_e
    bool stable = false;
    double margin = 0.0;                  // 1 - offered_load

    std::string describe() const;
};

/// LCFS preempt-resume: P(k,b) = prod_{i=1..k} E exp(-lambda (1 - P(b-i)) S).
CdfTable resume_cdf(const ModelConfig& config, int b_max);

/// LCFS preempt-repeat with resampling, via the embedded walk that steps down
/// with probability q = E exp(-lambda S) and up by a batch otherwise.
CdfTable resample_cdf(const ModelConfig& config, int b_max);

/// LCFS preempt-repeat without resampling:
/// P(k,b) = P(k-1,b) * E[ e^{-lambda S} / (1 - (1 - e^{-lambda S}) P(b-k)) ].
CdfTable noresample_cdf(const ModelConfig& config, int b_max);

/// Dispatches on config.discipline.
CdfTable max_cdf(const ModelConfig& config, int b_max);

/// Probability that a walk stepping -1 w.p. q and +1 w.p. 1-q, started at k,
/// reaches 0 before b + 1.
double ruin_closed_form(double q, int k, int b);

StabilityReport stability(const ModelConfig& config);

/// `b,P_marginal,P_1_b,...,P_{b_max}_b`, one row per b = 1..b_max, entries
/// with k > b written as 0, values with 12 significant digits.
std::string table_to_csv(const CdfTable& table);

/// Reads back the numeric part of table_to_csv output; '#' lines are skipped.
CdfTable parse_table_csv(std::string_view text);

/// "%.12g"
std::string format_sig12(double x);

}  // namespace maxq
