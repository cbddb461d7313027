#include "maxq/maxq.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "analytic.hpp"
#include "dist.hpp"
#include "errors.hpp"
#include "ordering.hpp"
#include "simulate.hpp"

struct maxq_service {
    maxq::ServiceDistribution dist;
};

struct maxq_batch {
    maxq::BatchDistribution batch;
};

struct maxq_model {
    maxq::ModelConfig config;
};

struct maxq_table {
    maxq::CdfTable table;
};

struct maxq_estimate {
    maxq::SimulationEstimate estimate;
};

struct maxq_family {
    maxq::FamilySpec spec;
    std::vector<maxq::FamilyMember> members;
};

namespace {

thread_local std::string g_last_error;

maxq_status fail(maxq_status status, const char* what) {
    g_last_error = what;
    return status;
}

template <class F>
maxq_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return MAXQ_OK;
    } catch (const maxq::InvalidArgument& e) {
        return fail(MAXQ_ERR_INVALID_ARGUMENT, e.what());
    } catch (const maxq::NumericFailure& e) {
        return fail(MAXQ_ERR_NUMERIC, e.what());
    } catch (const std::bad_alloc&) {
        return fail(MAXQ_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(MAXQ_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(MAXQ_ERR_INTERNAL, "unknown error");
    }
}

void require_ptr(const void* p, const char* name) {
    if (!p) throw maxq::InvalidArgument(std::string(name) + " is null");
}

char* duplicate(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

maxq::Discipline to_cpp(maxq_discipline d) {
    switch (d) {
        case MAXQ_RESUME: return maxq::Discipline::Resume;
        case MAXQ_REPEAT_RESAMPLE: return maxq::Discipline::RepeatResample;
        case MAXQ_REPEAT_NORESAMPLE: return maxq::Discipline::RepeatNoResample;
    }
    throw maxq::InvalidArgument("unknown discipline value");
}

maxq_discipline to_c(maxq::Discipline d) {
    switch (d) {
        case maxq::Discipline::Resume: return MAXQ_RESUME;
        case maxq::Discipline::RepeatResample: return MAXQ_REPEAT_RESAMPLE;
        case maxq::Discipline::RepeatNoResample: return MAXQ_REPEAT_NORESAMPLE;
    }
    return MAXQ_RESUME;
}

template <std::size_t N>
void copy_text(char (&dst)[N], const std::string& src) {
    const std::size_t n = std::min(N - 1, src.size());
    std::memcpy(dst, src.data(), n);
    dst[n] = '\0';
}

void fill_verdict(const maxq::OrderVerdict& v, maxq_verdict* out) {
    *out = maxq_verdict{};
    out->relation = static_cast<maxq_relation>(static_cast<int>(v.relation));
    out->holds = v.holds == maxq::Truth::True ? MAXQ_TRUE : v.holds == maxq::Truth::False ? MAXQ_FALSE : MAXQ_UNKNOWN;
    out->min_margin = v.min_margin;
    out->witness_value = v.witness_value;
    copy_text(out->witness_name, v.witness_name);
    copy_text(out->note, v.note);
    copy_text(out->report, v.describe());
}

}  // namespace

extern "C" {

const char* maxq_version(void) { return "1.0.0"; }

const char* maxq_last_error(void) { return g_last_error.c_str(); }

void maxq_string_free(char* s) { std::free(s); }

const char* maxq_status_name(maxq_status status) {
    switch (status) {
        case MAXQ_OK: return "ok";
        case MAXQ_ERR_INVALID_ARGUMENT: return "invalid argument";
        case MAXQ_ERR_NUMERIC: return "numeric failure";
        case MAXQ_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

maxq_status maxq_service_parse(const char* spec, maxq_service** out) {
    return guarded([&] {
        require_ptr(spec, "spec");
        require_ptr(out, "out");
        *out = new maxq_service{maxq::parse_service(spec)};
    });
}

maxq_service* maxq_service_clone(const maxq_service* s) {
    if (!s) return nullptr;
    return new (std::nothrow) maxq_service{s->dist};
}

void maxq_service_free(maxq_service* s) { delete s; }

maxq_status maxq_service_describe(const maxq_service* s, char** out) {
    return guarded([&] {
        require_ptr(s, "service");
        require_ptr(out, "out");
        *out = duplicate(s->dist.describe());
    });
}

maxq_status maxq_service_mean(const maxq_service* s, double* out) {
    return guarded([&] {
        require_ptr(s, "service");
        require_ptr(out, "out");
        *out = maxq::mean(s->dist);
    });
}

maxq_status maxq_service_laplace(const maxq_service* s, double theta, double* out) {
    return guarded([&] {
        require_ptr(s, "service");
        require_ptr(out, "out");
        *out = maxq::laplace(s->dist, theta);
    });
}

maxq_status maxq_service_exp_moment(const maxq_service* s, double lambda, double* out) {
    return guarded([&] {
        require_ptr(s, "service");
        require_ptr(out, "out");
        *out = maxq::exp_moment(s->dist, lambda);
    });
}

maxq_status maxq_service_cdf(const maxq_service* s, double x, double* out) {
    return guarded([&] {
        require_ptr(s, "service");
        require_ptr(out, "out");
        *out = maxq::cdf(s->dist, x);
    });
}

maxq_status maxq_service_sample(const maxq_service* s, uint64_t seed, double* out, size_t count) {
    return guarded([&] {
        require_ptr(s, "service");
        if (count) require_ptr(out, "out");
        maxq::RandomStream rng(seed);
        for (size_t i = 0; i < count; ++i) out[i] = maxq::sample(s->dist, rng);
    });
}

maxq_status maxq_batch_parse(const char* spec, maxq_batch** out) {
    return guarded([&] {
        require_ptr(spec, "spec");
        require_ptr(out, "out");
        *out = new maxq_batch{maxq::parse_batch(spec)};
    });
}

void maxq_batch_free(maxq_batch* b) { delete b; }

maxq_status maxq_batch_mean(const maxq_batch* b, double* out) {
    return guarded([&] {
        require_ptr(b, "batch");
        require_ptr(out, "out");
        *out = b->batch.mean();
    });
}

maxq_status maxq_batch_describe(const maxq_batch* b, char** out) {
    return guarded([&] {
        require_ptr(b, "batch");
        require_ptr(out, "out");
        *out = duplicate(b->batch.describe());
    });
}

maxq_status maxq_discipline_parse(const char* text, maxq_discipline* out) {
    return guarded([&] {
        require_ptr(text, "text");
        require_ptr(out, "out");
        *out = to_c(maxq::parse_discipline(text));
    });
}

const char* maxq_discipline_name(maxq_discipline d) {
    switch (d) {
        case MAXQ_RESUME: return "resume";
        case MAXQ_REPEAT_RESAMPLE: return "resample";
        case MAXQ_REPEAT_NORESAMPLE: return "noresample";
    }
    return "unknown";
}

maxq_status maxq_model_create(double lambda, const maxq_service* service, const maxq_batch* batch,
                              maxq_discipline discipline, maxq_model** out) {
    return guarded([&] {
        require_ptr(service, "service");
        require_ptr(batch, "batch");
        require_ptr(out, "out");
        *out = new maxq_model{maxq::ModelConfig::make(lambda, service->dist, batch->batch, to_cpp(discipline))};
    });
}

void maxq_model_free(maxq_model* m) { delete m; }

maxq_status maxq_model_describe(const maxq_model* m, char** out) {
    return guarded([&] {
        require_ptr(m, "model");
        require_ptr(out, "out");
        *out = duplicate(m->config.describe());
    });
}

maxq_status maxq_stability_compute(const maxq_model* m, maxq_stability* out) {
    return guarded([&] {
        require_ptr(m, "model");
        require_ptr(out, "out");
        const auto r = maxq::stability(m->config);
        out->discipline = to_c(r.discipline);
        out->effective_mean_service = r.effective_mean_service;
        out->offered_load = r.offered_load;
        out->stable = r.stable ? 1 : 0;
        out->margin = r.margin;
    });
}

maxq_status maxq_stability_describe(const maxq_model* m, char** out) {
    return guarded([&] {
        require_ptr(m, "model");
        require_ptr(out, "out");
        *out = duplicate(maxq::stability(m->config).describe());
    });
}

maxq_status maxq_cdf_compute(const maxq_model* m, int b_max, maxq_table** out) {
    return guarded([&] {
        require_ptr(m, "model");
        require_ptr(out, "out");
        *out = new maxq_table{maxq::max_cdf(m->config, b_max)};
    });
}

void maxq_table_free(maxq_table* t) { delete t; }

int maxq_table_bmax(const maxq_table* t) { return t ? t->table.b_max : 0; }

int maxq_table_defective(const maxq_table* t) { return t && t->table.defective ? 1 : 0; }

maxq_status maxq_table_marginal(const maxq_table* t, int b, double* out) {
    return guarded([&] {
        require_ptr(t, "table");
        require_ptr(out, "out");
        if (b < 0 || b > t->table.b_max) throw maxq::InvalidArgument("b out of range");
        *out = t->table.marginal[b];
    });
}

maxq_status maxq_table_entry(const maxq_table* t, int k, int b, double* out) {
    return guarded([&] {
        require_ptr(t, "table");
        require_ptr(out, "out");
        *out = t->table.p(k, b);
    });
}

maxq_status maxq_table_csv(const maxq_table* t, char** out) {
    return guarded([&] {
        require_ptr(t, "table");
        require_ptr(out, "out");
        *out = duplicate(maxq::table_to_csv(t->table));
    });
}

maxq_status maxq_ruin_closed_form(double q, int k, int b, double* out) {
    return guarded([&] {
        require_ptr(out, "out");
        *out = maxq::ruin_closed_form(q, k, b);
    });
}

maxq_status maxq_simulate(const maxq_model* m, int n_max, uint64_t replications, uint64_t seed,
                          const maxq_sim_options* options, maxq_estimate** out) {
    return guarded([&] {
        require_ptr(m, "model");
        require_ptr(out, "out");
        maxq::SimulationOptions opts;
        if (options) {
            if (options->max_events) opts.caps.max_events = options->max_events;
            if (options->max_queue) opts.caps.max_queue = options->max_queue;
            opts.threads = options->threads;
        }
        *out = new maxq_estimate{maxq::estimate_cdf(m->config, n_max, replications, seed, opts)};
    });
}

void maxq_estimate_free(maxq_estimate* e) { delete e; }

int maxq_estimate_nmax(const maxq_estimate* e) { return e ? e->estimate.n_max : 0; }

uint64_t maxq_estimate_replications(const maxq_estimate* e) { return e ? e->estimate.replications : 0; }

uint64_t maxq_estimate_overflow(const maxq_estimate* e) { return e ? e->estimate.overflow_count : 0; }

maxq_status maxq_estimate_cdf(const maxq_estimate* e, int n, double* p_hat, double* ci_halfwidth) {
    return guarded([&] {
        require_ptr(e, "estimate");
        if (n < 0 || n > e->estimate.n_max) throw maxq::InvalidArgument("n out of range");
        if (p_hat) *p_hat = e->estimate.cdf_hat[n];
        if (ci_halfwidth) *ci_halfwidth = e->estimate.ci_halfwidth[n];
    });
}

maxq_status maxq_estimate_count(const maxq_estimate* e, int n, uint64_t* out) {
    return guarded([&] {
        require_ptr(e, "estimate");
        require_ptr(out, "out");
        if (n < 0 || n > e->estimate.n_max) throw maxq::InvalidArgument("n out of range");
        *out = e->estimate.counts[n];
    });
}

maxq_status maxq_estimate_csv(const maxq_estimate* e, char** out) {
    return guarded([&] {
        require_ptr(e, "estimate");
        require_ptr(out, "out");
        *out = duplicate(maxq::estimate_to_csv(e->estimate));
    });
}

maxq_status maxq_check_lt_order(const maxq_service* a, const maxq_service* b, const double* theta_grid,
                                size_t grid_len, maxq_verdict* out) {
    return guarded([&] {
        require_ptr(a, "a");
        require_ptr(b, "b");
        require_ptr(out, "out");
        if (theta_grid) {
            fill_verdict(maxq::check_lt_order(a->dist, b->dist, std::span(theta_grid, grid_len)), out);
        } else {
            const auto grid = maxq::default_theta_grid();
            fill_verdict(maxq::check_lt_order(a->dist, b->dist, grid), out);
        }
    });
}

maxq_status maxq_check_transform_at_lambda(const maxq_service* a, const maxq_service* b, double lambda,
                                           maxq_verdict* out) {
    return guarded([&] {
        require_ptr(a, "a");
        require_ptr(b, "b");
        require_ptr(out, "out");
        fill_verdict(maxq::check_transform_at_lambda(a->dist, b->dist, lambda), out);
    });
}

maxq_status maxq_check_structural_cx(const maxq_service* a, const maxq_service* b, maxq_verdict* out) {
    return guarded([&] {
        require_ptr(a, "a");
        require_ptr(b, "b");
        require_ptr(out, "out");
        fill_verdict(maxq::check_structural_cx(a->dist, b->dist), out);
    });
}

maxq_status maxq_check_icv(const maxq_service* a, const maxq_service* b, maxq_verdict* out) {
    return guarded([&] {
        require_ptr(a, "a");
        require_ptr(b, "b");
        require_ptr(out, "out");
        fill_verdict(maxq::check_icv(a->dist, b->dist), out);
    });
}

maxq_status maxq_verify_dominance(const maxq_model* a, const maxq_model* b, int b_max, double tolerance,
                                  maxq_verdict* out) {
    return guarded([&] {
        require_ptr(a, "a");
        require_ptr(b, "b");
        require_ptr(out, "out");
        fill_verdict(maxq::verify_dominance(a->config, b->config, b_max, tolerance), out);
    });
}

maxq_status maxq_family_create(const char* family, const double* params, size_t n_params, maxq_family** out) {
    return guarded([&] {
        require_ptr(family, "family");
        require_ptr(out, "out");
        auto spec = maxq::FamilySpec::defaults(maxq::parse_family_kind(family));
        if (params) spec.params.assign(params, params + n_params);
        auto members = maxq::make_family(spec);
        *out = new maxq_family{std::move(spec), std::move(members)};
    });
}

void maxq_family_free(maxq_family* f) { delete f; }

size_t maxq_family_size(const maxq_family* f) { return f ? f->members.size() : 0; }

double maxq_family_lambda(const maxq_family* f) { return f ? f->spec.lambda : 0.0; }

int maxq_family_nmax(const maxq_family* f) { return f ? maxq::figure_n_max(f->spec.kind) : 0; }

maxq_status maxq_family_param(const maxq_family* f, size_t i, double* out) {
    return guarded([&] {
        require_ptr(f, "family");
        require_ptr(out, "out");
        if (i >= f->members.size()) throw maxq::InvalidArgument("family index out of range");
        *out = f->members[i].param;
    });
}

maxq_status maxq_family_member(const maxq_family* f, size_t i, maxq_service** out) {
    return guarded([&] {
        require_ptr(f, "family");
        require_ptr(out, "out");
        if (i >= f->members.size()) throw maxq::InvalidArgument("family index out of range");
        *out = new maxq_service{f->members[i].dist};
    });
}

}  // extern "C"
