#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dist.hpp"

namespace maxq {

enum class Relation {
    LT,                 // E exp(-theta A) >= E exp(-theta B) on a theta grid
    TransformAtLambda,  // the same comparison at the single point lambda
    IcvAssumed,         // A <=_icv B, from known family structure
    CxAssumed,          // A >=_cx B, from known family structure
    Stochastic,         // P_A(M <= b) >= P_B(M <= b) for every b
};

enum class Truth { False, True, Unknown };

std::string_view to_string(Relation r);
std::string_view to_string(Truth t);

/// Outcome of an order check. A false verdict always names the offending
/// point in (witness_name, witness_value).
struct OrderVerdict {
    Relation relation = Relation::LT;
    Truth holds = Truth::Unknown;
    double min_margin = 0.0;
    std::string witness_name;  // "theta", "lambda", "b" or "family"
    double witness_value = 0.0;
    std::string note;

    /// e.g. `relation=LT holds=true min_margin=0.00023 at theta=0.42`
    std::string describe() const;
};

/// 64 log-spaced points in [1e-3, 50].
std::vector<double> default_theta_grid();

/// A plays S': holds when laplace(A, t) >= laplace(B, t) at every grid point.
/// Grid evidence only.
OrderVerdict check_lt_order(const ServiceDistribution& a, const ServiceDistribution& b,
                            std::span<const double> theta_grid);

OrderVerdict check_transform_at_lambda(const ServiceDistribution& a, const ServiceDistribution& b,
                                       double lambda);

/// A >=_cx B when the pair is recognized structurally: identical laws, B a
/// point mass at E A, equal-midpoint uniforms with A at least as wide, mean-1
/// Pareto laws with alpha_A <= alpha_B, or hyperexponential(k) family members
/// with k_A >= k_B. Anything else is Unknown.
OrderVerdict check_structural_cx(const ServiceDistribution& a, const ServiceDistribution& b);

/// A <=_icv B, derived from check_structural_cx (equal means, A >=_cx B).
OrderVerdict check_icv(const ServiceDistribution& a, const ServiceDistribution& b);

enum class FamilyKind { UniformWidth, ParetoAlpha, HyperexpK };

std::string_view to_string(FamilyKind kind);
/// "uniform", "pareto" or "hyperexp".
FamilyKind parse_family_kind(std::string_view text);

struct FamilySpec {
    FamilyKind kind = FamilyKind::UniformWidth;
    std::vector<double> params;
    double common_mean = 1.0;
    double lambda = 0.9;

    /// Default members and arrival rate for the family.
    static FamilySpec defaults(FamilyKind kind);
};

struct FamilyMember {
    double param;
    ServiceDistribution dist;
};

/// Members in increasing-variability order (uniform width ascending, Pareto
/// alpha descending, hyperexponential k ascending), each with mean 1.
std::vector<FamilyMember> make_family(const FamilySpec& spec);

/// Largest n plotted for the family: 20, 20 and 10.
int figure_n_max(FamilyKind kind);

/// k when `h` is the two-phase hyperexponential(k) of the mean-1 family.
std::optional<int> hyperexp_family_k(const HyperExponential& h);

/// Builds both analytic tables and checks P_A(b) >= P_B(b) - tolerance for b = 1..b_max.
/// Models must share lambda, batch law and discipline.
OrderVerdict verify_dominance(const ModelConfig& a, const ModelConfig& b, int b_max, double tolerance);

}  // namespace maxq
