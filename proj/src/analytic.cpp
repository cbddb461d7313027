#include "analytic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "banded.hpp"
#include "errors.hpp"

namespace maxq {

namespace {

constexpr double kLogSpaceThreshold = 1e-12;

void check_request(const ModelConfig& config, int b_max, Discipline expected) {
    if (b_max < 1) throw InvalidArgument("b_max must be at least 1");
    if (config.discipline != expected)
        throw InvalidArgument("engine for '" + std::string(to_string(expected)) +
                              "' called with a '" + std::string(to_string(config.discipline)) +
                              "' model");
}

CdfTable empty_table(const ModelConfig& config, int b_max) {
    CdfTable t;
    t.b_max = b_max;
    t.discipline = config.discipline;
    t.config = config.describe();
    t.defective = !stability(config).stable;
    t.marginal.assign(b_max + 1, 0.0);
    t.rows.resize(b_max + 1);
    t.rows[0] = {1.0};
    return t;
}

// P(b) = sum_x pi_x P(x, b), with P(x, b) = 0 for x > b.
double marginal_of(const BatchDistribution& batch, const std::vector<double>& row, int b) {
    double sum = 0.0;
    const auto sizes = batch.sizes();
    const auto probs = batch.probs();
    for (std::size_t i = 0; i < sizes.size() && sizes[i] <= b; ++i) sum += probs[i] * row[sizes[i]];
    return sum;
}

// Running product of factors[b-1], factors[b-2], ... giving P(1,b), P(2,b), ...
// Switches to log accumulation once a factor below 1e-12 shows up.
std::vector<double> cumulative_products(const std::vector<double>& factors, int b) {
    std::vector<double> row(b + 1);
    row[0] = 1.0;
    double product = 1.0;
    double log_product = 0.0;
    bool in_log = false;
    for (int k = 1; k <= b; ++k) {
        const double f = factors[b - k];
        if (!in_log && f < kLogSpaceThreshold) {
            in_log = true;
            log_product = product > 0.0 ? std::log(product) : -std::numeric_limits<double>::infinity();
        }
        if (in_log) {
            log_product += std::log(f);
            row[k] = std::exp(log_product);
        } else {
            product *= f;
            row[k] = product;
        }
    }
    return row;
}

}  // namespace

double CdfTable::p(int k, int b) const {
    if (b < 0 || b > b_max || k < 0) throw InvalidArgument("table index out of range");
    if (k == 0) return 1.0;
    if (k > b) return 0.0;
    return rows[b][k];
}

CdfTable resume_cdf(const ModelConfig& config, int b_max) {
    check_request(config, b_max, Discipline::Resume);
    CdfTable t = empty_table(config, b_max);
    // factor[j] = E exp(-lambda (1 - P(j)) S), shared by every b > j.
    std::vector<double> factor;
    factor.reserve(b_max);
    for (int b = 1; b <= b_max; ++b) {
        factor.push_back(laplace(config.service, config.lambda * (1.0 - t.marginal[b - 1])));
        t.rows[b] = cumulative_products(factor, b);
        t.marginal[b] = marginal_of(config.batch, t.rows[b], b);
    }
    return t;
}

CdfTable resample_cdf(const ModelConfig& config, int b_max) {
    check_request(config, b_max, Discipline::RepeatResample);
    CdfTable t = empty_table(config, b_max);
    const double q = laplace(config.service, config.lambda);
    const double p = 1.0 - q;
    const auto sizes = config.batch.sizes();
    const auto probs = config.batch.probs();
    for (int b = 1; b <= b_max; ++b) {
        // Unknowns Q(1..b) at indices 0..b-1:
        // Q(k) - p sum_x pi_x Q(k+x) - q Q(k-1) = q [k == 1], Q(j) = 0 for j > b.
        const auto n = static_cast<std::size_t>(b);
        const std::size_t upper = std::min<std::size_t>(config.batch.max_size(), n - 1);
        BandMatrix a(n, n > 1 ? 1 : 0, upper);
        std::vector<double> rhs(n, 0.0);
        for (int k = 1; k <= b; ++k) {
            const auto row = static_cast<std::size_t>(k - 1);
            a.at(row, row) = 1.0;
            if (k > 1) a.at(row, row - 1) = -q;
            for (std::size_t i = 0; i < sizes.size() && k + sizes[i] <= b; ++i)
                a.at(row, row + sizes[i]) -= p * probs[i];
        }
        rhs[0] = q;
        const auto solution = solve_banded(a, rhs);
        auto& r = t.rows[b];
        r.assign(b + 1, 0.0);
        r[0] = 1.0;
        // Probabilities; the solve can overshoot 1 by an ulp near certainty.
        for (int k = 1; k <= b; ++k) r[k] = std::clamp(solution[k - 1], 0.0, 1.0);
        t.marginal[b] = marginal_of(config.batch, r, b);
    }
    return t;
}

CdfTable noresample_cdf(const ModelConfig& config, int b_max) {
    check_request(config, b_max, Discipline::RepeatNoResample);
    CdfTable t = empty_table(config, b_max);
    const double lambda = config.lambda;
    std::map<double, double> g_cache;
    const auto g = [&](double c) {
        if (auto it = g_cache.find(c); it != g_cache.end()) return it->second;
        const double value = expect(config.service, [lambda, c](double s) {
            const double survive = std::exp(-lambda * s);
            return survive / (1.0 - (1.0 - survive) * c);
        });
        g_cache.emplace(c, value);
        return value;
    };
    // factor[j] = g(P(j)); P(k,b) = P(k-1,b) g(P(b-k)) has the same product shape as resume.
    std::vector<double> factor;
    factor.reserve(b_max);
    for (int b = 1; b <= b_max; ++b) {
        factor.push_back(g(t.marginal[b - 1]));
        t.rows[b] = cumulative_products(factor, b);
        t.marginal[b] = marginal_of(config.batch, t.rows[b], b);
    }
    return t;
}

CdfTable max_cdf(const ModelConfig& config, int b_max) {
    switch (config.discipline) {
        case Discipline::Resume: return resume_cdf(config, b_max);
        case Discipline::RepeatResample: return resample_cdf(config, b_max);
        case Discipline::RepeatNoResample: return noresample_cdf(config, b_max);
    }
    throw InvalidArgument("unknown discipline");
}

double ruin_closed_form(double q, int k, int b) {
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("ruin_closed_form: q must lie in (0, 1)");
    if (k < 1 || b < k) throw InvalidArgument("ruin_closed_form: need 1 <= k <= b");
    const int n = b + 1;
    if (q == 0.5) return 1.0 - static_cast<double>(k) / n;
    // 1 - (1 - r^k) / (1 - r^n), r = q / p, written with expm1 to stay accurate near r = 1
    // and rescaled by r^-n when r > 1 so nothing overflows.
    const double log_r = std::log(q) - std::log1p(-q);
    if (log_r < 0.0) return 1.0 - std::expm1(k * log_r) / std::expm1(n * log_r);
    const double s = -log_r;  // log(1/r) < 0
    // (r^k - 1)/(r^n - 1) = e^{(k-n) log r} (1 - e^{-k log r}) / (1 - e^{-n log r})
    return 1.0 - std::exp((n - k) * s) * std::expm1(k * s) / std::expm1(n * s);
}

StabilityReport stability(const ModelConfig& config) {
    StabilityReport r;
    r.discipline = config.discipline;
    const double lambda = config.lambda;
    switch (config.discipline) {
        case Discipline::Resume:
            r.effective_mean_service = mean(config.service);
            break;
        case Discipline::RepeatResample: {
            const double lt = laplace(config.service, lambda);
            r.effective_mean_service =
                lt > 0.0 ? (1.0 - lt) / (lambda * lt) : std::numeric_limits<double>::infinity();
            break;
        }
        case Discipline::RepeatNoResample: {
            const double m = exp_moment(config.service, lambda);
            r.effective_mean_service = std::isinf(m) ? m : (m - 1.0) / lambda;
            break;
        }
    }
    r.offered_load = lambda * config.batch.mean() * r.effective_mean_service;
    r.stable = std::isfinite(r.offered_load) && r.offered_load < 1.0;
    r.margin = 1.0 - r.offered_load;
    return r;
}

std::string format_sig12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string StabilityReport::describe() const {
    std::ostringstream out;
    out << "stability discipline=" << to_string(discipline)
        << " effective_mean_service=" << format_sig12(effective_mean_service)
        << " offered_load=" << format_sig12(offered_load) << " stable=" << (stable ? "true" : "false")
        << " margin=" << format_sig12(margin);
    if (std::isinf(effective_mean_service)) out << " (E exp(lambda S) is infinite)";
    return out.str();
}

std::string table_to_csv(const CdfTable& table) {
    std::string out = "b,P_marginal";
    for (int k = 1; k <= table.b_max; ++k) out += ",P_" + std::to_string(k) + "_b";
    out += '\n';
    for (int b = 1; b <= table.b_max; ++b) {
        out += std::to_string(b) + ',' + format_sig12(table.marginal[b]);
        for (int k = 1; k <= table.b_max; ++k) out += ',' + format_sig12(table.p(k, b));
        out += '\n';
    }
    return out;
}

CdfTable parse_table_csv(std::string_view text) {
    CdfTable t;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header_seen = false;
    t.marginal = {0.0};
    t.rows = {{1.0}};
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line.rfind("b,P_marginal", 0) != 0) throw InvalidArgument("table csv: missing header");
            header_seen = true;
            continue;
        }
        std::vector<double> fields;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            try {
                fields.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw InvalidArgument("table csv: bad cell '" + cell + "'");
            }
        }
        const int b = static_cast<int>(fields.empty() ? -1 : fields[0]);
        if (b != t.b_max + 1 || fields.size() < static_cast<std::size_t>(b) + 2)
            throw InvalidArgument("table csv: malformed row for b=" + std::to_string(b));
        t.b_max = b;
        t.marginal.push_back(fields[1]);
        std::vector<double> r(b + 1);
        r[0] = 1.0;
        for (int k = 1; k <= b; ++k) r[k] = fields[k + 1];
        t.rows.push_back(std::move(r));
    }
    if (!header_seen) throw InvalidArgument("table csv: missing header");
    return t;
}

}  // namespace maxq
