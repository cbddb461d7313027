#pragma once

// Test-only reference computations. Nothing here calls the analytic engines
// or the library quadrature.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 200000) {
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

struct Bracket {
    double lower;  // probability mass absorbed with max <= b
    double upper;  // lower + mass still undecided when enumeration stopped
};

struct Atom {
    double value;
    double prob;
};

struct BatchAtom {
    int size;
    double prob;
};

/// Exhaustive enumeration of the busy-period event tree for repeat
/// disciplines with discrete service times: mass is pushed through the
/// embedded jump chain state by state (states are stacks of service atoms for
/// the no-resample case, bare counts for resampling). Paths whose population
/// exceeds b are dropped; mass still alive after max_steps is the error bound.
class RepeatTreeEnumerator {
public:
    RepeatTreeEnumerator(std::vector<Atom> atoms, std::vector<BatchAtom> batch, double lambda, bool resample)
        : atoms_(std::move(atoms)), batch_(std::move(batch)), lambda_(lambda), resample_(resample) {}

    /// P(M(k) <= b) bracketed.
    Bracket from_k(int k, int b, int max_steps = 4000, double drop_below = 0.0) const {
        std::map<std::vector<int>, double> states;
        for (const auto& [stack, mass] : fresh_customers(k)) states[stack] += mass;
        return run(std::move(states), b, max_steps, drop_below);
    }

    /// P(M <= b) with the initial batch drawn from the batch law.
    Bracket marginal(int b, int max_steps = 4000, double drop_below = 0.0) const {
        std::map<std::vector<int>, double> states;
        for (const auto& x : batch_) {
            if (x.size > b) continue;
            for (const auto& [stack, mass] : fresh_customers(x.size)) states[stack] += x.prob * mass;
        }
        return run(std::move(states), b, max_steps, drop_below);
    }

private:
    // Stacks of atom indices for k new customers. For resampling only the
    // count matters, encoded as k copies of index -1.
    std::vector<std::pair<std::vector<int>, double>> fresh_customers(int k) const {
        std::vector<std::pair<std::vector<int>, double>> out{{{}, 1.0}};
        for (int i = 0; i < k; ++i) {
            std::vector<std::pair<std::vector<int>, double>> next;
            for (const auto& [stack, mass] : out) {
                if (resample_) {
                    auto s = stack;
                    s.push_back(-1);
                    next.emplace_back(std::move(s), mass);
                    continue;
                }
                for (std::size_t a = 0; a < atoms_.size(); ++a) {
                    auto s = stack;
                    s.push_back(static_cast<int>(a));
                    next.emplace_back(std::move(s), mass * atoms_[a].prob);
                }
            }
            out = std::move(next);
        }
        return out;
    }

    Bracket run(std::map<std::vector<int>, double> states, int b, int max_steps, double drop_below) const {
        double absorbed = 0.0;
        double dropped = 0.0;
        for (int step = 0; step < max_steps && !states.empty(); ++step) {
            std::map<std::vector<int>, double> next;
            for (const auto& [stack, mass] : states) {
                if (mass <= drop_below) {
                    dropped += mass;
                    continue;
                }
                // Service attempt of the top customer against an exponential clock.
                std::vector<std::pair<double, double>> outcomes;  // (P(complete), weight)
                if (stack.back() >= 0)
                    outcomes.emplace_back(std::exp(-lambda_ * atoms_[stack.back()].value), 1.0);
                else
                    for (const auto& a : atoms_) outcomes.emplace_back(std::exp(-lambda_ * a.value), a.prob);
                for (const auto& [complete, weight] : outcomes) {
                    const double m = mass * weight;
                    auto popped = stack;
                    popped.pop_back();
                    if (popped.empty())
                        absorbed += m * complete;
                    else
                        next[popped] += m * complete;
                    for (const auto& x : batch_) {
                        if (static_cast<int>(stack.size()) + x.size > b) continue;
                        for (const auto& [fresh, fm] : fresh_customers(x.size)) {
                            auto pushed = stack;
                            pushed.insert(pushed.end(), fresh.begin(), fresh.end());
                            next[pushed] += m * (1.0 - complete) * x.prob * fm;
                        }
                    }
                }
            }
            states = std::move(next);
        }
        double alive = dropped;
        for (const auto& [stack, mass] : states) alive += mass;
        return {absorbed, absorbed + alive};
    }

    std::vector<Atom> atoms_;
    std::vector<BatchAtom> batch_;
    double lambda_;
    bool resample_;
};

/// E(S - t)^+ for the built-in mean-1 families; equal means plus pointwise
/// ordering of this transform is the convex order.
inline double stop_loss_uniform(double lo, double hi, double t) {
    if (t <= lo) return 0.5 * (lo + hi) - t;
    if (t >= hi) return 0.0;
    return (hi - t) * (hi - t) / (2.0 * (hi - lo));
}

inline double stop_loss_pareto(double alpha, double t) {
    const double xm = (alpha - 1.0) / alpha;
    if (t <= xm) return 1.0 - t;
    return std::pow(xm, alpha) * std::pow(t, 1.0 - alpha) / (alpha - 1.0);
}

inline double stop_loss_hyperexp(const std::vector<double>& probs, const std::vector<double>& rates, double t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) sum += probs[i] * std::exp(-rates[i] * t) / rates[i];
    return sum;
}

}  // namespace oracle
