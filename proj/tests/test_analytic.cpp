#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "analytic.hpp"
#include "banded.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "simulate.hpp"

using namespace maxq;

namespace {

ModelConfig model(double lambda, ServiceDistribution s, Discipline d,
                  BatchDistribution batch = BatchDistribution::unit()) {
    return ModelConfig::make(lambda, std::move(s), std::move(batch), d);
}

ModelConfig with(const ModelConfig& c, Discipline d) {
    ModelConfig out = c;
    out.discipline = d;
    return out;
}

double max_abs_diff(const CdfTable& a, const CdfTable& b) {
    double diff = 0.0;
    for (int n = 0; n <= a.b_max; ++n) {
        diff = std::max(diff, std::abs(a.marginal[n] - b.marginal[n]));
        for (int k = 0; k <= n; ++k) diff = std::max(diff, std::abs(a.p(k, n) - b.p(k, n)));
    }
    return diff;
}

void check_table_invariants(const CdfTable& t) {
    CHECK(t.marginal[0] == 0.0);
    for (int b = 0; b <= t.b_max; ++b) {
        CHECK(t.p(0, b) == 1.0);
        if (b < t.b_max) CHECK(t.p(b + 1, b) == 0.0);
        for (int k = 1; k <= b; ++k) {
            CHECK(t.p(k, b) >= 0.0);
            CHECK(t.p(k, b) <= 1.0);
            CHECK(t.p(k, b) <= t.p(k - 1, b) + 1e-15);
            if (b > 0) CHECK(t.p(k, b) >= t.p(k, b - 1) - 1e-15);
        }
        if (b > 0) CHECK(t.marginal[b] >= t.marginal[b - 1] - 1e-15);
        CHECK(t.marginal[b] <= 1.0 + 1e-15);
    }
}

std::vector<oracle::Atom> atoms_of(const ServiceDistribution& d) {
    std::vector<oracle::Atom> atoms;
    if (const auto* det = d.get_if<Deterministic>()) atoms.push_back({det->value, 1.0});
    if (const auto* disc = d.get_if<DiscreteEmpirical>())
        for (std::size_t i = 0; i < disc->values.size(); ++i) atoms.push_back({disc->values[i], disc->probs[i]});
    return atoms;
}

std::vector<oracle::BatchAtom> batch_of(const BatchDistribution& b) {
    std::vector<oracle::BatchAtom> out;
    for (std::size_t i = 0; i < b.sizes().size(); ++i) out.push_back({b.sizes()[i], b.probs()[i]});
    return out;
}

}  // namespace

TEST_CASE("resume_cdf: examples") {
    const auto c = model(0.5, ServiceDistribution::deterministic(1.0), Discipline::Resume);
    const auto t = resume_cdf(c, 2);
    CHECK(t.marginal[0] == 0.0);
    CHECK(t.p(0, 1) == 1.0);
    CHECK(t.p(0, 2) == 1.0);
    // Hand iteration of P(b) = E exp(-lambda (1 - P(b-1)) S) with S = 1.
    const double p1 = std::exp(-0.5);
    const double p2 = std::exp(-0.5 * (1.0 - p1));
    CHECK(std::abs(t.marginal[1] - p1) < 1e-15);
    CHECK(std::abs(t.marginal[2] - p2) < 1e-15);
    CHECK(std::abs(t.marginal[1] - 0.606530659713) < 1e-12);
    CHECK(std::abs(t.marginal[2] - 0.821408548614) < 1e-12);

    // Unit batch: P(1) = P(1,1) = E exp(-lambda S) for any S.
    for (const auto& s : {ServiceDistribution::uniform(0.0, 2.0), ServiceDistribution::pareto(2.0),
                          ServiceDistribution::exponential(1.3)}) {
        const auto tt = resume_cdf(model(0.7, s, Discipline::Resume), 3);
        CHECK(std::abs(tt.marginal[1] - laplace(s, 0.7)) < 1e-15);
        CHECK(tt.p(1, 1) == tt.marginal[1]);
    }

    // Every busy period starts with two customers.
    const auto tb = resume_cdf(model(0.5, ServiceDistribution::deterministic(1.0), Discipline::Resume,
                                     BatchDistribution::from_pmf({{2, 1.0}})),
                               6);
    CHECK(tb.marginal[1] == 0.0);
    CHECK(tb.marginal[2] == tb.p(2, 2));
    check_table_invariants(tb);

    CHECK_THROWS_AS(resume_cdf(c, 0), InvalidArgument);
    CHECK_THROWS_AS(resume_cdf(with(c, Discipline::RepeatResample), 5), InvalidArgument);
}

TEST_CASE("resume_cdf: P(k,b) is the product of transform factors") {
    const auto s = ServiceDistribution::uniform(0.2, 1.8);
    const auto c = model(0.8, s, Discipline::Resume, BatchDistribution::from_pmf({{1, 0.6}, {3, 0.4}}));
    const auto t = resume_cdf(c, 12);
    for (int b = 1; b <= 12; ++b) {
        for (int k = 1; k <= b; ++k) {
            double product = 1.0;
            for (int i = 1; i <= k; ++i) product *= laplace(s, 0.8 * (1.0 - t.marginal[b - i]));
            CHECK(std::abs(t.p(k, b) - product) < 1e-14);
        }
        const double marginal = 0.6 * t.p(1, b) + 0.4 * t.p(3, b);
        CHECK(std::abs(t.marginal[b] - marginal) < 1e-15);
    }
}

TEST_CASE("resume_cdf: log-space products for tiny factors") {
    // lambda = 60 makes E exp(-lambda (1 - P) S) far below 1e-12 for the first factors.
    const auto s = ServiceDistribution::deterministic(1.0);
    const auto t = resume_cdf(model(60.0, s, Discipline::Resume), 30);
    for (int b = 1; b <= 30; ++b) {
        double log_sum = 0.0;
        for (int k = 1; k <= b; ++k) {
            log_sum += -60.0 * (1.0 - t.marginal[b - k]);
            const double expected = std::exp(log_sum);
            CHECK(std::abs(t.p(k, b) - expected) <= 1e-12 * expected + 1e-300);
        }
    }
    check_table_invariants(t);
}

TEST_CASE("resample_cdf: examples") {
    const auto s = ServiceDistribution::uniform(0.5, 1.5);
    const auto t = resample_cdf(model(0.9, s, Discipline::RepeatResample), 10);
    const double q = laplace(s, 0.9);
    CHECK(std::abs(t.p(1, 1) - q) < 1e-15);
    for (int b = 1; b <= 10; ++b)
        for (int k = 1; k <= b; ++k) CHECK(std::abs(t.p(k, b) - ruin_closed_form(q, k, b)) < 1e-12);
    check_table_invariants(t);
}

TEST_CASE("resample_cdf: unit batches match the gambler's-ruin formula") {
    for (double q_target : {0.3, 0.5, 0.6, 0.7}) {
        const double lambda = 0.5;
        const auto s = ServiceDistribution::deterministic(-std::log(q_target) / lambda);
        const double q = laplace(s, lambda);
        const auto t = resample_cdf(model(lambda, s, Discipline::RepeatResample), 40);
        for (int b = 1; b <= 40; ++b)
            for (int k = 1; k <= b; ++k) CHECK(std::abs(t.p(k, b) - ruin_closed_form(q, k, b)) < 1e-12);
    }
}

TEST_CASE("resample_cdf: batch arrivals against exhaustive enumeration") {
    const auto s = ServiceDistribution::discrete({{0.5, 0.5}, {1.5, 0.5}});
    const auto batch = BatchDistribution::from_pmf({{1, 0.5}, {2, 0.3}, {3, 0.2}});
    const auto c = model(0.4, s, Discipline::RepeatResample, batch);
    const auto t = resample_cdf(c, 8);
    oracle::RepeatTreeEnumerator tree(atoms_of(s), batch_of(batch), 0.4, true);
    for (int b = 1; b <= 8; ++b) {
        const auto bracket = tree.marginal(b);
        CHECK(bracket.upper - bracket.lower < 1e-12);
        CHECK(t.marginal[b] >= bracket.lower - 1e-12);
        CHECK(t.marginal[b] <= bracket.upper + 1e-12);
    }
    check_table_invariants(t);
}

TEST_CASE("resample_cdf equals resume_cdf for exponential service") {
    for (double lambda : {0.3, 0.9, 1.4}) {
        for (const auto& batch : {BatchDistribution::unit(), BatchDistribution::from_pmf({{1, 0.5}, {2, 0.5}})}) {
            const auto c = model(lambda, ServiceDistribution::exponential(1.0), Discipline::Resume, batch);
            const double diff = max_abs_diff(resume_cdf(c, 30), resample_cdf(with(c, Discipline::RepeatResample), 30));
            CHECK(diff < 1e-10);
        }
    }
}

TEST_CASE("noresample_cdf: examples") {
    for (const auto& s : {ServiceDistribution::uniform(0.0, 2.0), ServiceDistribution::exponential(2.0),
                          ServiceDistribution::pareto(2.5)}) {
        const auto t = noresample_cdf(model(0.5, s, Discipline::RepeatNoResample), 4);
        CHECK(std::abs(t.p(1, 1) - laplace(s, 0.5)) < 1e-10);
        check_table_invariants(t);
    }
    // S = 1: P(1,2) = g(P(1)) with P(1) = e^{-1/2}.
    const auto t = noresample_cdf(model(0.5, ServiceDistribution::discrete({{1.0, 1.0}}), Discipline::RepeatNoResample), 2);
    const double p1 = std::exp(-0.5);
    CHECK(std::abs(t.marginal[1] - p1) < 1e-15);
    CHECK(std::abs(t.p(1, 2) - p1 / (1.0 - (1.0 - p1) * p1)) < 1e-15);
    oracle::RepeatTreeEnumerator tree({{1.0, 1.0}}, {{1, 1.0}}, 0.5, false);
    const auto bracket = tree.from_k(1, 2);
    CHECK(bracket.upper - bracket.lower < 1e-13);
    CHECK(t.p(1, 2) >= bracket.lower - 1e-13);
    CHECK(t.p(1, 2) <= bracket.upper + 1e-13);
}

TEST_CASE("noresample_cdf against exhaustive enumeration of the event tree") {
    struct Case {
        ServiceDistribution s;
        BatchDistribution batch;
        double lambda;
        int b_max;
    };
    const std::vector<Case> cases = {
        {ServiceDistribution::discrete({{0.5, 0.5}, {1.5, 0.5}}), BatchDistribution::unit(), 0.5, 6},
        {ServiceDistribution::discrete({{0.2, 0.7}, {2.0, 0.3}}), BatchDistribution::unit(), 0.4, 6},
        {ServiceDistribution::discrete({{0.5, 0.5}, {1.5, 0.5}}), BatchDistribution::from_pmf({{1, 0.6}, {2, 0.4}}),
         0.3, 5},
    };
    for (const auto& c : cases) {
        const auto t = noresample_cdf(model(c.lambda, c.s, Discipline::RepeatNoResample, c.batch), c.b_max);
        oracle::RepeatTreeEnumerator tree(atoms_of(c.s), batch_of(c.batch), c.lambda, false);
        for (int b = 1; b <= c.b_max; ++b) {
            const auto bracket = tree.marginal(b, 6000, 1e-22);
            INFO("b=" << b << " lower=" << bracket.lower << " upper=" << bracket.upper);
            CHECK(bracket.upper - bracket.lower < 1e-10);
            CHECK(t.marginal[b] >= bracket.lower - 1e-12);
            CHECK(t.marginal[b] <= bracket.upper + 1e-12);
            for (int k = 1; k <= std::min(b, 3); ++k) {
                const auto bk = tree.from_k(k, b, 6000, 1e-22);
                CHECK(t.p(k, b) >= bk.lower - 1e-12);
                CHECK(t.p(k, b) <= bk.upper + 1e-12);
            }
        }
    }
}

TEST_CASE("noresample_cdf equals resample_cdf for deterministic service") {
    for (double lambda : {0.2, 0.4, 0.7}) {
        for (const auto& batch : {BatchDistribution::unit(), BatchDistribution::from_pmf({{1, 0.5}, {3, 0.5}})}) {
            const auto c = model(lambda, ServiceDistribution::deterministic(1.0), Discipline::RepeatResample, batch);
            CHECK(max_abs_diff(resample_cdf(c, 40), noresample_cdf(with(c, Discipline::RepeatNoResample), 40)) < 1e-10);
        }
    }
}

TEST_CASE("ruin_closed_form") {
    for (double q : {0.1, 0.3, 0.5, 0.77}) CHECK(std::abs(ruin_closed_form(q, 1, 1) - q) < 1e-15);
    CHECK(ruin_closed_form(0.5, 1, 3) == 0.75);
    // Continuity through q = 1/2.
    CHECK(std::abs(ruin_closed_form(0.5 + 1e-9, 4, 9) - (1.0 - 4.0 / 10.0)) < 1e-8);
    // Brute force: solve the walk by value iteration.
    for (double q : {0.3, 0.7}) {
        const int b = 12;
        std::vector<double> h(b + 2, 0.0);
        h[0] = 1.0;
        for (int it = 0; it < 20000; ++it)
            for (int k = 1; k <= b; ++k) h[k] = q * h[k - 1] + (1.0 - q) * h[k + 1];
        for (int k = 1; k <= b; ++k) CHECK(std::abs(ruin_closed_form(q, k, b) - h[k]) < 1e-12);
    }
    // Large b stays finite.
    CHECK(std::isfinite(ruin_closed_form(0.9, 5, 5000)));
    CHECK(std::isfinite(ruin_closed_form(0.1, 5, 5000)));
    CHECK_THROWS_AS(ruin_closed_form(0.0, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(ruin_closed_form(1.0, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(ruin_closed_form(0.5, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(ruin_closed_form(0.5, 3, 2), InvalidArgument);
}

TEST_CASE("stability: examples") {
    const auto unit = BatchDistribution::unit();
    auto r = stability(model(0.9, ServiceDistribution::uniform(0.0, 2.0), Discipline::Resume));
    CHECK(std::abs(r.offered_load - 0.9) < 1e-15);
    CHECK(r.stable);
    CHECK(std::abs(r.margin - 0.1) < 1e-15);

    // No-resample with exponential(rate nu), mu = 1: stable iff nu > 2 lambda.
    const double lambda = 0.5;
    CHECK_FALSE(stability(model(lambda, ServiceDistribution::exponential(0.999), Discipline::RepeatNoResample)).stable);
    CHECK_FALSE(stability(model(lambda, ServiceDistribution::exponential(1.0), Discipline::RepeatNoResample)).stable);
    CHECK(stability(model(lambda, ServiceDistribution::exponential(1.001), Discipline::RepeatNoResample)).stable);

    r = stability(model(0.01, ServiceDistribution::pareto(3.0), Discipline::RepeatNoResample));
    CHECK_FALSE(r.stable);
    CHECK(std::isinf(r.effective_mean_service));

    // Resample: E S_e = (1 - L) / (lambda L).
    const auto s = ServiceDistribution::uniform(0.5, 1.5);
    r = stability(model(0.6, s, Discipline::RepeatResample));
    const double lt = laplace(s, 0.6);
    CHECK(std::abs(r.effective_mean_service - (1.0 - lt) / (0.6 * lt)) < 1e-15);
    CHECK(r.stable == (lt > 0.5));
    CHECK(r.describe().find("stable=true") != std::string::npos);
}

TEST_CASE("stability: effective service time matches simulated server time") {
    // Mean server time per customer, resample and no-resample, from direct simulation of one
    // customer against Poisson interruptions (independent of the closed forms).
    const double lambda = 0.6;
    const auto s = ServiceDistribution::uniform(0.5, 1.5);
    RandomStream rng(5);
    std::exponential_distribution<double> t(lambda);
    const int n = 400'000;
    double resample_total = 0.0, noresample_total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (;;) {  // resample
            const double need = sample(s, rng), gap = t(rng);
            if (gap >= need) { resample_total += need; break; }
            resample_total += gap;
        }
        const double need = sample(s, rng);
        for (;;) {  // no resample
            const double gap = t(rng);
            if (gap >= need) { noresample_total += need; break; }
            noresample_total += gap;
        }
    }
    const auto rs = stability(model(lambda, s, Discipline::RepeatResample));
    const auto ns = stability(model(lambda, s, Discipline::RepeatNoResample));
    CHECK(std::abs(resample_total / n - rs.effective_mean_service) < 0.01);
    CHECK(std::abs(noresample_total / n - ns.effective_mean_service) < 0.01);
}

TEST_CASE("max_cdf dispatches on discipline") {
    const auto base = model(0.6, ServiceDistribution::uniform(0.2, 1.8), Discipline::Resume);
    CHECK(max_abs_diff(max_cdf(base, 15), resume_cdf(base, 15)) == 0.0);
    const auto rs = with(base, Discipline::RepeatResample);
    CHECK(max_abs_diff(max_cdf(rs, 15), resample_cdf(rs, 15)) == 0.0);
    const auto nr = with(base, Discipline::RepeatNoResample);
    CHECK(max_abs_diff(max_cdf(nr, 15), noresample_cdf(nr, 15)) == 0.0);
}

TEST_CASE("random configurations satisfy the table invariants and geometric tails") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const double v1 = 0.1 + 1.5 * u(rng), v2 = 0.1 + 1.5 * u(rng), p = 0.1 + 0.8 * u(rng);
        const auto s = ServiceDistribution::discrete({{v1, p}, {v2, 1.0 - p}});
        const auto batch = trial % 2 ? BatchDistribution::unit() : BatchDistribution::from_pmf({{1, 0.7}, {2, 0.3}});
        const double lambda = 0.05 + 0.6 * u(rng);
        for (auto d : {Discipline::Resume, Discipline::RepeatResample, Discipline::RepeatNoResample}) {
            const auto c = model(lambda, s, d, batch);
            const auto t = max_cdf(c, 60);
            check_table_invariants(t);
            CHECK(t.defective == !stability(c).stable);
            if (t.defective) continue;
            CHECK(1.0 - t.marginal[60] <= 1.0 - t.marginal[59]);
            // tail ratio over the last five points stays below 1 unless the tail has vanished
            for (int b = 56; b <= 60; ++b) {
                const double prev = 1.0 - t.marginal[b - 1];
                const double cur = 1.0 - t.marginal[b];
                if (prev > 1e-13) CHECK(cur / prev < 1.0);
            }
        }
    }
}

TEST_CASE("Laplace-transform ordering carries over to the resume marginal") {
    // Pairs where the first law has the larger transform everywhere: mean-preserving
    // spreads and stochastically smaller laws.
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const double c = 0.3 + u(rng), spread = c * u(rng), p = 0.2 + 0.6 * u(rng);
        const auto narrow = ServiceDistribution::deterministic(c);
        const auto wide = ServiceDistribution::discrete({{c - spread * (1 - p) / p * p, p}, {c + spread * p / (1 - p) * (1 - p), 1 - p}});
        const double lambda = 0.2 + 0.5 * u(rng);
        const auto ta = resume_cdf(model(lambda, wide, Discipline::Resume), 25);
        const auto tb = resume_cdf(model(lambda, narrow, Discipline::Resume), 25);
        for (int b = 1; b <= 25; ++b) CHECK(ta.marginal[b] >= tb.marginal[b] - 1e-12);
    }
}

TEST_CASE("table csv round trip") {
    const auto c = model(0.7, ServiceDistribution::hyperexponential({0.75, 0.25}, {1.5, 0.5}), Discipline::Resume,
                         BatchDistribution::from_pmf({{1, 0.5}, {2, 0.5}}));
    const auto t = resume_cdf(c, 12);
    const auto csv = table_to_csv(t);
    CHECK(csv.rfind("b,P_marginal,P_1_b,P_2_b,", 0) == 0);
    const auto back = parse_table_csv(csv);
    REQUIRE(back.b_max == 12);
    for (int b = 1; b <= 12; ++b) {
        CHECK(back.marginal[b] == std::stod(format_sig12(t.marginal[b])));
        for (int k = 1; k <= b; ++k) {
            CHECK(back.p(k, b) == std::stod(format_sig12(t.p(k, b))));
            CHECK(std::abs(back.p(k, b) - t.p(k, b)) <= 5e-12 * t.p(k, b) + 1e-300);
        }
    }
    CHECK_THROWS_AS(parse_table_csv("nonsense\n"), InvalidArgument);
}

TEST_CASE("banded solver matches the dense solver") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + trial, lower = trial % 3, upper = 1 + trial % 4;
        BandMatrix a(n, lower, upper);
        std::vector<double> dense(n * n, 0.0), rhs(n);
        for (std::size_t r = 0; r < n; ++r) {
            rhs[r] = u(rng);
            for (std::size_t col = 0; col < n; ++col) {
                if (!a.in_band(r, col)) continue;
                const double v = r == col ? 5.0 + u(rng) : u(rng);
                a.at(r, col) = v;
                dense[r * n + col] = v;
            }
        }
        const auto x = solve_banded(a, rhs);
        const auto y = solve_dense(dense, rhs);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(x[i] - y[i]) < 1e-12);
    }
    // Zero leading pivot forces the pivoted fallback.
    BandMatrix a(2, 1, 1);
    a.at(0, 1) = 1.0;
    a.at(1, 0) = 1.0;
    a.at(1, 1) = 1.0;
    const auto x = solve_banded(a, std::vector<double>{2.0, 5.0});
    CHECK(std::abs(x[0] - 3.0) < 1e-15);
    CHECK(std::abs(x[1] - 2.0) < 1e-15);
    BandMatrix singular(2, 1, 1);
    CHECK_THROWS_AS(solve_banded(singular, std::vector<double>{1.0, 1.0}), NumericFailure);
}
