#include "dist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "errors.hpp"
#include "quadrature.hpp"

namespace maxq {

namespace {

constexpr double kProbSumTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

void validate_probs(std::span<const double> probs, const char* who) {
    require(!probs.empty(), std::string(who) + ": empty probability vector");
    double sum = 0.0;
    for (double p : probs) {
        require(std::isfinite(p) && p >= 0.0, std::string(who) + ": negative or non-finite probability");
        sum += p;
    }
    require(std::abs(sum - 1.0) <= kProbSumTol,
            std::string(who) + ": probabilities sum to " + format_double(sum) + ", not 1");
}

std::vector<double> running_sum(std::span<const double> probs) {
    std::vector<double> cum(probs.size());
    std::partial_sum(probs.begin(), probs.end(), cum.begin());
    return cum;
}

// Index drawn by inverse CDF over a cumulative array; the last index absorbs rounding.
std::size_t pick(std::span<const double> cumulative, RandomStream& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                 cumulative.size() - 1);
}

// E f(S) for S ~ Exponential(rate), integrated against the density on [0, inf).
double expect_exponential(double rate, const std::function<double(double)>& f) {
    return integrate([&](double s) { return rate * std::exp(-rate * s) * f(s); }, 0.0,
                     std::numeric_limits<double>::infinity());
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

bool operator==(const Deterministic& a, const Deterministic& b) { return a.value == b.value; }
bool operator==(const Exponential& a, const Exponential& b) { return a.rate == b.rate; }
bool operator==(const Uniform& a, const Uniform& b) { return a.lo == b.lo && a.hi == b.hi; }
bool operator==(const Pareto& a, const Pareto& b) { return a.alpha == b.alpha; }
bool operator==(const HyperExponential& a, const HyperExponential& b) {
    return a.probs == b.probs && a.rates == b.rates;
}
bool operator==(const DiscreteEmpirical& a, const DiscreteEmpirical& b) {
    return a.values == b.values && a.probs == b.probs;
}
bool operator==(const ServiceDistribution& a, const ServiceDistribution& b) {
    return a.law_ == b.law_;
}

ServiceDistribution ServiceDistribution::deterministic(double value) {
    require(std::isfinite(value) && value > 0.0, "det: value must be positive and finite");
    return ServiceDistribution(Deterministic{value});
}

ServiceDistribution ServiceDistribution::exponential(double rate) {
    require(std::isfinite(rate) && rate > 0.0, "exp: rate must be positive and finite");
    return ServiceDistribution(Exponential{rate});
}

ServiceDistribution ServiceDistribution::uniform(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && lo < hi,
            "unif: need 0 <= a < b");
    return ServiceDistribution(Uniform{lo, hi});
}

ServiceDistribution ServiceDistribution::pareto(double alpha) {
    require(std::isfinite(alpha) && alpha > 1.0, "pareto: alpha must exceed 1");
    return ServiceDistribution(Pareto{alpha});
}

ServiceDistribution ServiceDistribution::hyperexponential(std::vector<double> probs,
                                                          std::vector<double> rates) {
    require(probs.size() == rates.size(), "hyperexp: probs and rates differ in length");
    validate_probs(probs, "hyperexp");
    for (double r : rates) require(std::isfinite(r) && r > 0.0, "hyperexp: rates must be positive");
    auto cum = running_sum(probs);
    return ServiceDistribution(HyperExponential{std::move(probs), std::move(rates), std::move(cum)});
}

ServiceDistribution ServiceDistribution::discrete(std::vector<std::pair<double, double>> atoms) {
    require(!atoms.empty(), "disc: no atoms");
    std::sort(atoms.begin(), atoms.end());
    DiscreteEmpirical law;
    for (const auto& [value, prob] : atoms) {
        require(std::isfinite(value) && value > 0.0, "disc: atom values must be positive");
        if (!law.values.empty() && law.values.back() == value) {
            law.probs.back() += prob;
            continue;
        }
        law.values.push_back(value);
        law.probs.push_back(prob);
    }
    validate_probs(law.probs, "disc");
    law.cumulative = running_sum(law.probs);
    return ServiceDistribution(std::move(law));
}

std::string ServiceDistribution::describe() const {
    const auto pairs = [](std::span<const double> first, std::span<const double> second) {
        std::string out;
        for (std::size_t i = 0; i < first.size(); ++i) {
            if (i) out += ';';
            out += format_double(first[i]) + ',' + format_double(second[i]);
        }
        return out;
    };
    return std::visit(
        Overloaded{
            [](const Deterministic& d) { return "det:" + format_double(d.value); },
            [](const Exponential& d) { return "exp:" + format_double(d.rate); },
            [](const Uniform& d) { return "unif:" + format_double(d.lo) + ',' + format_double(d.hi); },
            [](const Pareto& d) { return "pareto:" + format_double(d.alpha); },
            [&](const HyperExponential& d) { return "hyperexp:" + pairs(d.probs, d.rates); },
            [&](const DiscreteEmpirical& d) { return "disc:" + pairs(d.values, d.probs); },
        },
        law_);
}

double laplace(const ServiceDistribution& dist, double theta) {
    require(std::isfinite(theta) && theta >= 0.0, "laplace: theta must be nonnegative");
    if (theta == 0.0) return 1.0;
    return std::visit(
        Overloaded{
            [&](const Deterministic& d) { return std::exp(-theta * d.value); },
            [&](const Exponential& d) { return d.rate / (d.rate + theta); },
            [&](const Uniform& d) {
                const double width = d.hi - d.lo;
                return -std::exp(-theta * d.lo) * std::expm1(-theta * width) / (theta * width);
            },
            [&](const Pareto&) {
                return expect(dist, [theta](double s) { return std::exp(-theta * s); });
            },
            [&](const HyperExponential& d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d.probs.size(); ++i)
                    sum += d.probs[i] * d.rates[i] / (d.rates[i] + theta);
                return sum;
            },
            [&](const DiscreteEmpirical& d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d.values.size(); ++i)
                    sum += d.probs[i] * std::exp(-theta * d.values[i]);
                return sum;
            },
        },
        dist.law());
}

double exp_moment(const ServiceDistribution& dist, double lambda) {
    require(std::isfinite(lambda) && lambda > 0.0, "exp_moment: lambda must be positive");
    return std::visit(
        Overloaded{
            [&](const Deterministic& d) { return std::exp(lambda * d.value); },
            [&](const Exponential& d) { return d.rate > lambda ? d.rate / (d.rate - lambda) : kInf; },
            [&](const Uniform& d) {
                const double width = d.hi - d.lo;
                return std::exp(lambda * d.lo) * std::expm1(lambda * width) / (lambda * width);
            },
            [&](const Pareto&) { return kInf; },
            [&](const HyperExponential& d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d.probs.size(); ++i) {
                    if (d.probs[i] == 0.0) continue;
                    if (d.rates[i] <= lambda) return kInf;
                    sum += d.probs[i] * d.rates[i] / (d.rates[i] - lambda);
                }
                return sum;
            },
            [&](const DiscreteEmpirical& d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d.values.size(); ++i)
                    sum += d.probs[i] * std::exp(lambda * d.values[i]);
                return sum;
            },
        },
        dist.law());
}

double mean(const ServiceDistribution& dist) {
    return std::visit(
        Overloaded{
            [](const Deterministic& d) { return d.value; },
            [](const Exponential& d) { return 1.0 / d.rate; },
            [](const Uniform& d) { return 0.5 * (d.lo + d.hi); },
            [](const Pareto&) { return 1.0; },
            [](const HyperExponential& d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d.probs.size(); ++i) sum += d.probs[i] / d.rates[i];
                return sum;
            },
            [](const DiscreteEmpirical& d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d.values.size(); ++i) sum += d.probs[i] * d.values[i];
                return sum;
            },
        },
        dist.law());
}

double cdf(const ServiceDistribution& dist, double x) {
    return std::visit(
        Overloaded{
            [&](const Deterministic& d) { return x >= d.value ? 1.0 : 0.0; },
            [&](const Exponential& d) { return x <= 0.0 ? 0.0 : -std::expm1(-d.rate * x); },
            [&](const Uniform& d) { return std::clamp((x - d.lo) / (d.hi - d.lo), 0.0, 1.0); },
            [&](const Pareto& d) {
                const double xm = d.x_min();
                return x <= xm ? 0.0 : 1.0 - std::pow(xm / x, d.alpha);
            },
            [&](const HyperExponential& d) {
                if (x <= 0.0) return 0.0;
                double tail = 0.0;
                for (std::size_t i = 0; i < d.probs.size(); ++i)
                    tail += d.probs[i] * std::exp(-d.rates[i] * x);
                return 1.0 - tail;
            },
            [&](const DiscreteEmpirical& d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d.values.size() && d.values[i] <= x; ++i) sum += d.probs[i];
                return std::min(sum, 1.0);
            },
        },
        dist.law());
}

double expect(const ServiceDistribution& dist, const std::function<double(double)>& f) {
    return std::visit(
        Overloaded{
            [&](const Deterministic& d) { return f(d.value); },
            [&](const Exponential& d) { return expect_exponential(d.rate, f); },
            [&](const Uniform& d) {
                return integrate(f, d.lo, d.hi) / (d.hi - d.lo);
            },
            [&](const Pareto& d) {
                // s = x_min / t maps (x_min, inf) onto (0, 1); density becomes alpha t^(alpha-1).
                const double xm = d.x_min();
                const double a = d.alpha;
                return integrate([&](double t) { return a * std::pow(t, a - 1.0) * f(xm / t); }, 0.0, 1.0);
            },
            [&](const HyperExponential& d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d.probs.size(); ++i)
                    if (d.probs[i] > 0.0) sum += d.probs[i] * expect_exponential(d.rates[i], f);
                return sum;
            },
            [&](const DiscreteEmpirical& d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d.values.size(); ++i) sum += d.probs[i] * f(d.values[i]);
                return sum;
            },
        },
        dist.law());
}

double sample(const ServiceDistribution& dist, RandomStream& rng) {
    return std::visit(
        Overloaded{
            [&](const Deterministic& d) { return d.value; },
            [&](const Exponential& d) { return std::exponential_distribution<double>(d.rate)(rng); },
            [&](const Uniform& d) { return std::uniform_real_distribution<double>(d.lo, d.hi)(rng); },
            [&](const Pareto& d) {
                // u in (0, 1]
                const double u = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                return d.x_min() * std::pow(u, -1.0 / d.alpha);
            },
            [&](const HyperExponential& d) {
                const std::size_t i = pick(d.cumulative, rng);
                return std::exponential_distribution<double>(d.rates[i])(rng);
            },
            [&](const DiscreteEmpirical& d) { return d.values[pick(d.cumulative, rng)]; },
        },
        dist.law());
}

BatchDistribution BatchDistribution::unit() { return from_pmf({{1, 1.0}}); }

BatchDistribution BatchDistribution::from_pmf(std::vector<std::pair<int, double>> pmf) {
    require(!pmf.empty(), "batch: empty pmf");
    std::sort(pmf.begin(), pmf.end());
    BatchDistribution batch;
    for (const auto& [size, prob] : pmf) {
        require(size >= 1, "batch: sizes must be >= 1");
        require(batch.sizes_.empty() || batch.sizes_.back() != size, "batch: duplicate size");
        batch.sizes_.push_back(size);
        batch.probs_.push_back(prob);
    }
    validate_probs(batch.probs_, "batch");
    batch.cumulative_ = running_sum(batch.probs_);
    batch.mean_ = 0.0;
    for (std::size_t i = 0; i < batch.sizes_.size(); ++i) batch.mean_ += batch.sizes_[i] * batch.probs_[i];
    return batch;
}

std::string BatchDistribution::describe() const {
    if (is_unit()) return "unit";
    std::string out = "disc:";
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(sizes_[i]) + ',' + format_double(probs_[i]);
    }
    return out;
}

int sample_batch(const BatchDistribution& batch, RandomStream& rng) {
    if (batch.sizes_.size() == 1) return batch.sizes_[0];
    return batch.sizes_[pick(batch.cumulative_, rng)];
}

std::string_view to_string(Discipline d) {
    switch (d) {
        case Discipline::Resume: return "resume";
        case Discipline::RepeatResample: return "resample";
        case Discipline::RepeatNoResample: return "noresample";
    }
    return "?";
}

Discipline parse_discipline(std::string_view text) {
    if (text == "resume") return Discipline::Resume;
    if (text == "resample") return Discipline::RepeatResample;
    if (text == "noresample") return Discipline::RepeatNoResample;
    throw InvalidArgument("unknown discipline '" + std::string(text) +
                          "' (expected resume, resample or noresample)");
}

ModelConfig ModelConfig::make(double lambda, ServiceDistribution service, BatchDistribution batch,
                              Discipline discipline) {
    require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive and finite");
    return ModelConfig{lambda, std::move(service), std::move(batch), discipline};
}

std::string ModelConfig::describe() const {
    return "discipline=" + std::string(to_string(discipline)) + " dist=" + service.describe() +
           " lambda=" + format_double(lambda) + " batch=" + batch.describe();
}

// --- specifier parsing ---------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double parse_number(std::string_view token, std::string_view context) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size())
        throw InvalidArgument("bad number '" + std::string(token) + "' in '" + std::string(context) + "'");
    return value;
}

std::vector<double> parse_list(std::string_view body, std::size_t expected, std::string_view context) {
    const auto parts = split(body, ',');
    if (parts.size() != expected)
        throw InvalidArgument("expected " + std::to_string(expected) + " value(s) in '" +
                              std::string(context) + "'");
    std::vector<double> out;
    for (auto p : parts) out.push_back(parse_number(p, context));
    return out;
}

std::vector<std::pair<double, double>> parse_pairs(std::string_view body, std::string_view context) {
    std::vector<std::pair<double, double>> out;
    for (auto item : split(body, ';')) {
        if (item.empty()) continue;  // tolerate a trailing ';'
        const auto v = parse_list(item, 2, context);
        out.emplace_back(v[0], v[1]);
    }
    if (out.empty()) throw InvalidArgument("no entries in '" + std::string(context) + "'");
    return out;
}

ServiceDistribution build_service(std::string_view s) {
    const auto colon = s.find(':');
    if (colon == std::string_view::npos)
        throw InvalidArgument("distribution specifier '" + std::string(s) + "' lacks ':'");
    const auto kind = s.substr(0, colon);
    const auto body = s.substr(colon + 1);
    if (kind == "det") return ServiceDistribution::deterministic(parse_list(body, 1, s)[0]);
    if (kind == "exp") return ServiceDistribution::exponential(parse_list(body, 1, s)[0]);
    if (kind == "unif") {
        const auto v = parse_list(body, 2, s);
        return ServiceDistribution::uniform(v[0], v[1]);
    }
    if (kind == "pareto") return ServiceDistribution::pareto(parse_list(body, 1, s)[0]);
    if (kind == "hyperexp") {
        std::vector<double> probs, rates;
        for (const auto& [p, r] : parse_pairs(body, s)) {
            probs.push_back(p);
            rates.push_back(r);
        }
        return ServiceDistribution::hyperexponential(std::move(probs), std::move(rates));
    }
    if (kind == "disc") return ServiceDistribution::discrete(parse_pairs(body, s));
    throw InvalidArgument("unknown distribution kind '" + std::string(kind) + "'");
}

BatchDistribution build_batch(std::string_view s) {
    if (s == "unit") return BatchDistribution::unit();
    if (s.substr(0, 5) != "disc:")
        throw InvalidArgument("batch specifier '" + std::string(s) + "' must be 'unit' or 'disc:k,p;...'");
    std::vector<std::pair<int, double>> pmf;
    for (const auto& [k, p] : parse_pairs(s.substr(5), s)) {
        if (k != std::floor(k) || k < 1 || k > 1e6)
            throw InvalidArgument("batch size '" + format_double(k) + "' is not a positive integer");
        pmf.emplace_back(static_cast<int>(k), p);
    }
    return BatchDistribution::from_pmf(std::move(pmf));
}

// Parameter checks in the factories do not know the specifier text; add it.
template <class F>
auto naming_specifier(std::string_view s, F&& build) {
    try {
        return build(s);
    } catch (const InvalidArgument& e) {
        const std::string what = e.what();
        if (what.find("'" + std::string(s) + "'") != std::string::npos) throw;
        throw InvalidArgument(what + " (in '" + std::string(s) + "')");
    }
}

}  // namespace

ServiceDistribution parse_service(std::string_view text) { return naming_specifier(trim(text), build_service); }

BatchDistribution parse_batch(std::string_view text) { return naming_specifier(trim(text), build_batch); }

}  // namespace maxq
