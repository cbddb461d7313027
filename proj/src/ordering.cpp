#include "ordering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "analytic.hpp"
#include "errors.hpp"

namespace maxq {

namespace {

constexpr double kMeanTol = 1e-10;

OrderVerdict structural(Relation relation, Truth holds, std::string note) {
    OrderVerdict v;
    v.relation = relation;
    v.holds = holds;
    v.witness_name = "family";
    v.note = std::move(note);
    return v;
}

}  // namespace

std::string_view to_string(Relation r) {
    switch (r) {
        case Relation::LT: return "LT";
        case Relation::TransformAtLambda: return "transform_at_lambda";
        case Relation::IcvAssumed: return "icv_assumed";
        case Relation::CxAssumed: return "cx_assumed";
        case Relation::Stochastic: return "st";
    }
    return "?";
}

std::string_view to_string(Truth t) {
    switch (t) {
        case Truth::False: return "false";
        case Truth::True: return "true";
        case Truth::Unknown: return "unknown";
    }
    return "?";
}

std::string OrderVerdict::describe() const {
    std::string out = "relation=" + std::string(to_string(relation)) +
                      " holds=" + std::string(to_string(holds));
    if (witness_name == "family") {
        out += " witness=" + (note.empty() ? std::string("none") : note);
        return out;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, " min_margin=%.6g at %s=%.6g", min_margin, witness_name.c_str(),
                  witness_value);
    out += buf;
    return out;
}

std::vector<double> default_theta_grid() {
    constexpr int kPoints = 64;
    const double lo = std::log(1e-3);
    const double hi = std::log(50.0);
    std::vector<double> grid(kPoints);
    for (int i = 0; i < kPoints; ++i) grid[i] = std::exp(lo + (hi - lo) * i / (kPoints - 1));
    return grid;
}

OrderVerdict check_lt_order(const ServiceDistribution& a, const ServiceDistribution& b,
                            std::span<const double> theta_grid) {
    if (theta_grid.empty()) throw InvalidArgument("theta grid is empty");
    OrderVerdict v;
    v.relation = Relation::LT;
    v.witness_name = "theta";
    v.min_margin = std::numeric_limits<double>::infinity();
    for (double theta : theta_grid) {
        if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("theta grid must be positive");
        const double margin = laplace(a, theta) - laplace(b, theta);
        if (margin < v.min_margin) {
            v.min_margin = margin;
            v.witness_value = theta;
        }
    }
    v.holds = v.min_margin >= 0.0 ? Truth::True : Truth::False;
    v.note = "grid evidence";
    return v;
}

OrderVerdict check_transform_at_lambda(const ServiceDistribution& a, const ServiceDistribution& b,
                                       double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
    OrderVerdict v;
    v.relation = Relation::TransformAtLambda;
    v.witness_name = "lambda";
    v.witness_value = lambda;
    v.min_margin = laplace(a, lambda) - laplace(b, lambda);
    v.holds = v.min_margin >= 0.0 ? Truth::True : Truth::False;
    return v;
}

std::optional<int> hyperexp_family_k(const HyperExponential& h) {
    if (h.probs.size() != 2) return std::nullopt;
    for (int k = 1; k <= 60; ++k) {
        const double tail = std::ldexp(1.0, -k);
        const double p1 = 1.0 - tail;
        if (std::abs(h.probs[0] - p1) > 1e-12) continue;
        const double rate1 = 2.0 * p1;              // mean 1 / (2 (1 - 2^-k))
        const double rate2 = std::ldexp(1.0, 1 - k); // mean 2^k / 2
        if (std::abs(h.rates[0] - rate1) <= 1e-12 * rate1 && std::abs(h.rates[1] - rate2) <= 1e-12 * rate2)
            return k;
    }
    return std::nullopt;
}

OrderVerdict check_structural_cx(const ServiceDistribution& a, const ServiceDistribution& b) {
    if (a == b) return structural(Relation::CxAssumed, Truth::True, "identical");
    const double mean_a = mean(a);
    if (const auto* point = b.get_if<Deterministic>();
        point && std::abs(point->value - mean_a) <= kMeanTol * std::max(1.0, mean_a)) {
        return structural(Relation::CxAssumed, Truth::True, "point_mass_at_mean");
    }
    if (a.get_if<Deterministic>() && std::abs(mean(b) - mean_a) <= kMeanTol * std::max(1.0, mean_a)) {
        // b >=_cx a, so a >=_cx b only when b is degenerate too (handled above).
        return structural(Relation::CxAssumed, Truth::False, "point_mass_at_mean_reversed");
    }
    const auto* ua = a.get_if<Uniform>();
    const auto* ub = b.get_if<Uniform>();
    if (ua && ub && std::abs((ua->lo + ua->hi) - (ub->lo + ub->hi)) <= 2 * kMeanTol) {
        const bool wider = ua->hi - ua->lo >= ub->hi - ub->lo;
        return structural(Relation::CxAssumed, wider ? Truth::True : Truth::False, "uniform_width");
    }
    const auto* pa = a.get_if<Pareto>();
    const auto* pb = b.get_if<Pareto>();
    if (pa && pb)
        return structural(Relation::CxAssumed, pa->alpha <= pb->alpha ? Truth::True : Truth::False,
                          "pareto_alpha");
    const auto* ha = a.get_if<HyperExponential>();
    const auto* hb = b.get_if<HyperExponential>();
    if (ha && hb) {
        const auto ka = hyperexp_family_k(*ha);
        const auto kb = hyperexp_family_k(*hb);
        if (ka && kb)
            return structural(Relation::CxAssumed, *ka >= *kb ? Truth::True : Truth::False, "hyperexp_k");
    }
    // Hyperexponential(1) is Exponential(1).
    if (ha && b.get_if<Exponential>() && b.get_if<Exponential>()->rate == 1.0 && hyperexp_family_k(*ha))
        return structural(Relation::CxAssumed, Truth::True, "hyperexp_k");
    return structural(Relation::CxAssumed, Truth::Unknown, "unrecognized_pair");
}

OrderVerdict check_icv(const ServiceDistribution& a, const ServiceDistribution& b) {
    OrderVerdict v = check_structural_cx(a, b);
    v.relation = Relation::IcvAssumed;
    // A >=_cx B implies A <=_icv B; a failed cx test says nothing about icv.
    if (v.holds == Truth::False) v.holds = Truth::Unknown;
    return v;
}

std::string_view to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::UniformWidth: return "uniform";
        case FamilyKind::ParetoAlpha: return "pareto";
        case FamilyKind::HyperexpK: return "hyperexp";
    }
    return "?";
}

FamilyKind parse_family_kind(std::string_view text) {
    if (text == "uniform" || text == "uniform_width") return FamilyKind::UniformWidth;
    if (text == "pareto" || text == "pareto_alpha") return FamilyKind::ParetoAlpha;
    if (text == "hyperexp" || text == "hyperexp_k") return FamilyKind::HyperexpK;
    throw InvalidArgument("unknown family '" + std::string(text) +
                          "' (expected uniform, pareto or hyperexp)");
}

FamilySpec FamilySpec::defaults(FamilyKind kind) {
    FamilySpec spec;
    spec.kind = kind;
    switch (kind) {
        case FamilyKind::UniformWidth:
            spec.params = {0.0, 0.25, 0.5, 0.75, 1.0};
            spec.lambda = 0.9;
            break;
        case FamilyKind::ParetoAlpha:
            spec.params = {5.0, 3.0, 2.0, 1.5};
            spec.lambda = 0.95;
            break;
        case FamilyKind::HyperexpK:
            spec.params = {1.0, 2.0, 3.0, 4.0};
            spec.lambda = 0.95;
            break;
    }
    return spec;
}

int figure_n_max(FamilyKind kind) { return kind == FamilyKind::HyperexpK ? 10 : 20; }

std::vector<FamilyMember> make_family(const FamilySpec& spec) {
    if (spec.params.empty()) throw InvalidArgument("family has no parameters");
    if (spec.common_mean != 1.0) throw InvalidArgument("built-in families have mean 1");
    std::vector<double> params = spec.params;
    std::vector<FamilyMember> members;
    switch (spec.kind) {
        case FamilyKind::UniformWidth:
            std::sort(params.begin(), params.end());
            for (double w : params) {
                if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("uniform width must lie in [0, 1]");
                members.push_back({w, w == 0.0 ? ServiceDistribution::deterministic(1.0)
                                               : ServiceDistribution::uniform(1.0 - w, 1.0 + w)});
            }
            break;
        case FamilyKind::ParetoAlpha:
            std::sort(params.begin(), params.end(), std::greater<>());
            for (double alpha : params) members.push_back({alpha, ServiceDistribution::pareto(alpha)});
            break;
        case FamilyKind::HyperexpK:
            std::sort(params.begin(), params.end());
            for (double kd : params) {
                if (kd != std::floor(kd) || kd < 1 || kd > 60)
                    throw InvalidArgument("hyperexp k must be an integer in [1, 60]");
                const int k = static_cast<int>(kd);
                const double tail = std::ldexp(1.0, -k);
                const double p1 = 1.0 - tail;
                members.push_back({kd, ServiceDistribution::hyperexponential(
                                           {p1, tail}, {2.0 * p1, std::ldexp(1.0, 1 - k)})});
            }
            break;
    }
    if (std::adjacent_find(params.begin(), params.end()) != params.end())
        throw InvalidArgument("duplicate family parameter");
    return members;
}

OrderVerdict verify_dominance(const ModelConfig& a, const ModelConfig& b, int b_max, double tolerance) {
    if (a.lambda != b.lambda) throw InvalidArgument("dominance check needs the same arrival rate");
    if (!(a.batch == b.batch)) throw InvalidArgument("dominance check needs the same batch law");
    if (a.discipline != b.discipline) throw InvalidArgument("dominance check needs the same discipline");
    if (!(tolerance >= 0.0)) throw InvalidArgument("tolerance must be nonnegative");
    const auto ta = max_cdf(a, b_max);
    const auto tb = max_cdf(b, b_max);
    OrderVerdict v;
    v.relation = Relation::Stochastic;
    v.witness_name = "b";
    v.min_margin = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= b_max; ++n) {
        const double gap = ta.marginal[n] - tb.marginal[n];
        if (gap < v.min_margin) {
            v.min_margin = gap;
            v.witness_value = n;
        }
    }
    v.holds = v.min_margin >= -tolerance ? Truth::True : Truth::False;
    return v;
}

}  // namespace maxq
