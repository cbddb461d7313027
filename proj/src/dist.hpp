#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace maxq {

/// Random stream handed to a single consumer at a time.
using RandomStream = std::mt19937_64;

struct Deterministic {
    double value;
};

struct Exponential {
    double rate;
};

struct Uniform {
    double lo;
    double hi;
};

/// Pareto(alpha) normalized to mean 1: F(x) = 1 - (x_min / x)^alpha, x_min = (alpha - 1) / alpha.
struct Pareto {
    double alpha;
    double x_min() const { return (alpha - 1.0) / alpha; }
};

struct HyperExponential {
    std::vector<double> probs;
    std::vector<double> rates;
    std::vector<double> cumulative;
};

struct DiscreteEmpirical {
    std::vector<double> values;
    std::vector<double> probs;
    std::vector<double> cumulative;
};

/// Law of the generic service time S. Immutable; parameters are validated by
/// the factory functions, so every instance is well formed.
class ServiceDistribution {
public:
    using Law = std::variant<Deterministic, Exponential, Uniform, Pareto, HyperExponential,
                             DiscreteEmpirical>;

    static ServiceDistribution deterministic(double value);
    static ServiceDistribution exponential(double rate);
    static ServiceDistribution uniform(double lo, double hi);
    static ServiceDistribution pareto(double alpha);
    static ServiceDistribution hyperexponential(std::vector<double> probs, std::vector<double> rates);
    static ServiceDistribution discrete(std::vector<std::pair<double, double>> atoms);

    const Law& law() const { return law_; }

    template <class T>
    const T* get_if() const {
        return std::get_if<T>(&law_);
    }

    bool is_discrete() const {
        return std::holds_alternative<Deterministic>(law_) ||
               std::holds_alternative<DiscreteEmpirical>(law_);
    }

    /// Specifier text (`det:1`, `unif:0,2`, ...) that parses back to the same law.
    std::string describe() const;

    friend bool operator==(const ServiceDistribution& a, const ServiceDistribution& b);

private:
    explicit ServiceDistribution(Law law) : law_(std::move(law)) {}
    Law law_;
};

bool operator==(const Deterministic& a, const Deterministic& b);
bool operator==(const Exponential& a, const Exponential& b);
bool operator==(const Uniform& a, const Uniform& b);
bool operator==(const Pareto& a, const Pareto& b);
bool operator==(const HyperExponential& a, const HyperExponential& b);
bool operator==(const DiscreteEmpirical& a, const DiscreteEmpirical& b);

/// E[exp(-theta S)] for theta >= 0.
double laplace(const ServiceDistribution& dist, double theta);

/// E[exp(lambda S)]; +infinity when the moment diverges.
double exp_moment(const ServiceDistribution& dist, double lambda);

double mean(const ServiceDistribution& dist);

/// P(S <= x).
double cdf(const ServiceDistribution& dist, double x);

/// E[f(S)] for bounded f. Discrete laws are summed exactly; continuous laws
/// use adaptive Gauss-Kronrod with absolute tolerance 1e-10.
double expect(const ServiceDistribution& dist, const std::function<double(double)>& f);

double sample(const ServiceDistribution& dist, RandomStream& rng);

/// Finite-support pmf of the batch size X.
class BatchDistribution {
public:
    static BatchDistribution unit();
    static BatchDistribution from_pmf(std::vector<std::pair<int, double>> pmf);

    std::span<const int> sizes() const { return sizes_; }
    std::span<const double> probs() const { return probs_; }
    double mean() const { return mean_; }
    int max_size() const { return sizes_.back(); }
    bool is_unit() const { return sizes_.size() == 1 && sizes_[0] == 1; }

    std::string describe() const;

    friend bool operator==(const BatchDistribution& a, const BatchDistribution& b) {
        return a.sizes_ == b.sizes_ && a.probs_ == b.probs_;
    }

private:
    BatchDistribution() = default;
    std::vector<int> sizes_;  // ascending
    std::vector<double> probs_;
    std::vector<double> cumulative_;
    double mean_ = 1.0;

    friend int sample_batch(const BatchDistribution& batch, RandomStream& rng);
};

int sample_batch(const BatchDistribution& batch, RandomStream& rng);

enum class Discipline { Resume, RepeatResample, RepeatNoResample };

std::string_view to_string(Discipline d);
Discipline parse_discipline(std::string_view text);

struct ModelConfig {
    double lambda;
    ServiceDistribution service;
    BatchDistribution batch;
    Discipline discipline;

    /// Validates lambda > 0 (finite).
    static ModelConfig make(double lambda, ServiceDistribution service, BatchDistribution batch,
                            Discipline discipline);

    std::string describe() const;
};

// Textual specifiers: det:d exp:rate unif:a,b pareto:alpha
// hyperexp:p1,r1;p2,r2;... disc:v1,p1;v2,p2;...
ServiceDistribution parse_service(std::string_view text);
// unit | disc:k1,p1;k2,p2;...
BatchDistribution parse_batch(std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace maxq
