// maxq command-line front end. Talks to the library only through maxq.h.

#include <maxq/maxq.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Failure {
    int code;
    std::string message;
};

void check(maxq_status status) {
    if (status == MAXQ_OK) return;
    const int code = status == MAXQ_ERR_INVALID_ARGUMENT ? kExitUsage : kExitNumeric;
    throw Failure{code, maxq_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Service = std::unique_ptr<maxq_service, Deleter<maxq_service, maxq_service_free>>;
using Batch = std::unique_ptr<maxq_batch, Deleter<maxq_batch, maxq_batch_free>>;
using Model = std::unique_ptr<maxq_model, Deleter<maxq_model, maxq_model_free>>;
using Table = std::unique_ptr<maxq_table, Deleter<maxq_table, maxq_table_free>>;
using Estimate = std::unique_ptr<maxq_estimate, Deleter<maxq_estimate, maxq_estimate_free>>;
using Family = std::unique_ptr<maxq_family, Deleter<maxq_family, maxq_family_free>>;

std::string take(char* s) {
    std::string out(s);
    maxq_string_free(s);
    return out;
}

std::string sig12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

Service parse_service(const std::string& spec) {
    maxq_service* s = nullptr;
    check(maxq_service_parse(spec.c_str(), &s));
    return Service(s);
}

Batch parse_batch(const std::string& spec) {
    maxq_batch* b = nullptr;
    check(maxq_batch_parse(spec.c_str(), &b));
    return Batch(b);
}

maxq_discipline parse_discipline(const std::string& text) {
    maxq_discipline d{};
    check(maxq_discipline_parse(text.c_str(), &d));
    return d;
}

Model make_model(double lambda, const maxq_service* s, const maxq_batch* b, maxq_discipline d) {
    maxq_model* m = nullptr;
    check(maxq_model_create(lambda, s, b, d, &m));
    return Model(m);
}

Table compute(const maxq_model* m, int b_max) {
    maxq_table* t = nullptr;
    check(maxq_cdf_compute(m, b_max, &t));
    return Table(t);
}

double marginal(const maxq_table* t, int b) {
    double p = 0.0;
    check(maxq_table_marginal(t, b, &p));
    return p;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure{kExitUsage, "cannot open '" + path + "' for writing"};
    out << text;
    if (!out) throw Failure{kExitNumeric, "write to '" + path + "' failed"};
}

std::string single_quoted(const std::string& s) { return "'" + s + "'"; }

// Plot script for a CSV whose first column is the x axis.
std::string gnuplot_script(const std::string& csv_path, int columns, const std::string& title) {
    std::string gp = "set datafile separator ','\nset datafile commentschars '#'\n";
    gp += "set key autotitle columnhead\nset key bottom right\n";
    gp += "set xlabel 'n'\nset ylabel 'P(M <= n)'\nset yrange [0:1]\n";
    gp += "set title " + single_quoted(title) + "\n";
    gp += "plot";
    for (int c = 2; c <= columns; ++c) {
        gp += (c == 2 ? " " : ", \\\n     ");
        gp += single_quoted(csv_path) + " using 1:" + std::to_string(c) + " with linespoints";
    }
    gp += "\n";
    return gp;
}

struct ModelFlags {
    std::string discipline = "resume";
    std::string dist;
    std::string batch = "unit";
    double lambda = 0.0;
    bool strict = false;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool with_dist = true) {
    cmd->add_option("--discipline", f.discipline, "resume, resample or noresample")->capture_default_str();
    if (with_dist) cmd->add_option("--dist", f.dist, "service law, e.g. det:1 exp:1 unif:0,2 pareto:2")->required();
    cmd->add_option("--batch", f.batch, "unit or disc:k1,p1;k2,p2;...")->capture_default_str();
    cmd->add_flag("--strict", f.strict, "treat an unstable model as an error (exit 3)");
}

// Prints the stability line; under --strict an unstable model ends the run.
void report_stability(const maxq_model* m, bool strict, const std::string& label = "") {
    char* text = nullptr;
    check(maxq_stability_describe(m, &text));
    std::cout << "# " << (label.empty() ? "" : label + " ") << take(text) << "\n";
    maxq_stability st{};
    check(maxq_stability_compute(m, &st));
    if (strict && !st.stable) throw Failure{kExitNumeric, "model is unstable (--strict)"};
}

int run_analyze(const ModelFlags& f, int b_max, const std::string& out, bool gnuplot) {
    const auto service = parse_service(f.dist);
    const auto batch = parse_batch(f.batch);
    const auto model = make_model(f.lambda, service.get(), batch.get(), parse_discipline(f.discipline));
    report_stability(model.get(), f.strict);
    const auto table = compute(model.get(), b_max);
    char* csv = nullptr;
    check(maxq_table_csv(table.get(), &csv));
    write_text(out, take(csv));
    if (gnuplot) write_text(out + ".gp", gnuplot_script(out, 2, f.discipline + " " + f.dist));
    return 0;
}

struct SimFlags {
    int n_max = 20;
    std::uint64_t replications = 100000;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::uint64_t max_events = 0;
    std::uint64_t max_queue = 0;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("MAXQ_SEED"); env && *env) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (*end != '\0') throw Failure{kExitUsage, "MAXQ_SEED is not an unsigned integer: '" + std::string(env) + "'"};
        return v;
    }
    return 42;
}

int run_simulate(const ModelFlags& f, const SimFlags& s, const std::string& out, bool gnuplot) {
    const auto service = parse_service(f.dist);
    const auto batch = parse_batch(f.batch);
    const auto model = make_model(f.lambda, service.get(), batch.get(), parse_discipline(f.discipline));
    report_stability(model.get(), f.strict);
    const maxq_sim_options options{s.max_events, s.max_queue, s.threads};
    maxq_estimate* raw = nullptr;
    check(maxq_simulate(model.get(), s.n_max, s.replications, s.seed.value_or(default_seed()), &options, &raw));
    const Estimate estimate(raw);
    const auto overflow = maxq_estimate_overflow(estimate.get());
    if (overflow > 0)
        std::cerr << "warning: " << overflow << " of " << maxq_estimate_replications(estimate.get())
                  << " busy periods hit the event or queue cap and were left out\n";
    char* csv = nullptr;
    check(maxq_estimate_csv(estimate.get(), &csv));
    write_text(out, take(csv));
    if (gnuplot) write_text(out + ".gp", gnuplot_script(out, 2, "simulated " + f.discipline + " " + f.dist));
    return 0;
}

struct CompareFlags {
    std::string dist_a;
    std::string dist_b;
    std::optional<double> lambda;
    std::optional<double> lambda_a;
    std::optional<double> lambda_b;
    double tolerance = 1e-9;
};

int run_compare(ModelFlags f, const CompareFlags& c, int b_max, const std::string& out, bool gnuplot) {
    const double la = c.lambda_a ? *c.lambda_a : c.lambda.value_or(NAN);
    const double lb = c.lambda_b ? *c.lambda_b : c.lambda.value_or(NAN);
    if (std::isnan(la) || std::isnan(lb)) throw Failure{kExitUsage, "--lambda (or both --lambdaA and --lambdaB) is required"};
    if (la != lb)
        throw Failure{kExitUsage, "compare needs the same arrival rate, got --lambdaA " + sig12(la) +
                                      " and --lambdaB " + sig12(lb)};
    const auto a = parse_service(c.dist_a);
    const auto b = parse_service(c.dist_b);
    const auto batch = parse_batch(f.batch);
    const auto discipline = parse_discipline(f.discipline);

    maxq_verdict premise{};
    switch (discipline) {
        case MAXQ_RESUME: check(maxq_check_lt_order(a.get(), b.get(), nullptr, 0, &premise)); break;
        case MAXQ_REPEAT_RESAMPLE: check(maxq_check_transform_at_lambda(a.get(), b.get(), la, &premise)); break;
        case MAXQ_REPEAT_NORESAMPLE: check(maxq_check_icv(a.get(), b.get(), &premise)); break;
    }
    std::cout << "# premise " << premise.report << "\n";

    const auto ma = make_model(la, a.get(), batch.get(), discipline);
    const auto mb = make_model(lb, b.get(), batch.get(), discipline);
    report_stability(ma.get(), f.strict, "A");
    report_stability(mb.get(), f.strict, "B");
    const auto ta = compute(ma.get(), b_max);
    const auto tb = compute(mb.get(), b_max);
    std::string csv = "b,P_A,P_B,gap\n";
    for (int n = 1; n <= b_max; ++n) {
        const double pa = marginal(ta.get(), n);
        const double pb = marginal(tb.get(), n);
        csv += std::to_string(n) + ',' + sig12(pa) + ',' + sig12(pb) + ',' + sig12(pa - pb) + '\n';
    }
    maxq_verdict verdict{};
    check(maxq_verify_dominance(ma.get(), mb.get(), b_max, c.tolerance, &verdict));
    write_text(out, csv);
    if (gnuplot) write_text(out + ".gp", gnuplot_script(out, 3, f.discipline + ": A=" + c.dist_a + " B=" + c.dist_b));
    std::cout << "# verdict " << verdict.report << "\n";
    return 0;
}

struct FigureFlags {
    std::string family;
    std::vector<double> params;
    std::optional<double> lambda;
    std::optional<int> n_max;
    std::string outdir;
};

const char* param_label(const std::string& family) {
    if (family == "uniform") return "w";
    if (family == "pareto") return "alpha";
    return "k";
}

int run_figures(const FigureFlags& f, const std::string& out, bool gnuplot) {
    maxq_family* raw = nullptr;
    check(maxq_family_create(f.family.c_str(), f.params.empty() ? nullptr : f.params.data(), f.params.size(), &raw));
    const Family family(raw);
    const double lambda = f.lambda.value_or(maxq_family_lambda(family.get()));
    const int n_max = f.n_max.value_or(maxq_family_nmax(family.get()));
    const auto batch = parse_batch("unit");
    const std::size_t size = maxq_family_size(family.get());

    std::vector<std::string> labels;
    std::vector<std::vector<double>> curves;
    for (std::size_t i = 0; i < size; ++i) {
        double param = 0.0;
        check(maxq_family_param(family.get(), i, &param));
        maxq_service* member = nullptr;
        check(maxq_family_member(family.get(), i, &member));
        const Service service(member);
        const auto model = make_model(lambda, service.get(), batch.get(), MAXQ_RESUME);
        const auto table = compute(model.get(), n_max);
        std::vector<double> curve(n_max + 1, 0.0);
        for (int n = 1; n <= n_max; ++n) curve[n] = marginal(table.get(), n);
        labels.push_back(std::string(param_label(f.family)) + "=" + sig12(param));
        curves.push_back(std::move(curve));
    }

    // Members come in increasing-variability order, so each curve must sit on
    // or above the previous one, and every curve must be nondecreasing in n.
    constexpr double kTol = 1e-9;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (int n = 2; n <= n_max; ++n)
            if (curves[i][n] < curves[i][n - 1] - kTol)
                throw Failure{kExitNumeric, "curve " + labels[i] + " decreases at n=" + std::to_string(n)};
        if (i == 0) continue;
        for (int n = 1; n <= n_max; ++n)
            if (curves[i][n] < curves[i - 1][n] - kTol)
                throw Failure{kExitNumeric, "curve " + labels[i] + " falls below " + labels[i - 1] +
                                                " at n=" + std::to_string(n)};
    }

    std::cout << "# figures family=" << f.family << " discipline=resume lambda=" << sig12(lambda)
              << " n_max=" << n_max << " members=" << size << "\n";
    if (!f.outdir.empty()) {
        std::filesystem::create_directories(f.outdir);
        std::string gp = "set datafile separator ','\nset key autotitle columnhead\nset key bottom right\n"
                         "set xlabel 'n'\nset ylabel 'P(M <= n)'\nset yrange [0:1]\nset title " +
                         single_quoted(f.family + ", lambda=" + sig12(lambda)) + "\nplot";
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const std::string name = f.family + "_" + labels[i].substr(labels[i].find('=') + 1) + ".csv";
            const std::string path = (std::filesystem::path(f.outdir) / name).string();
            std::string csv = "n,P\n";
            for (int n = 1; n <= n_max; ++n) csv += std::to_string(n) + ',' + sig12(curves[i][n]) + '\n';
            write_text(path, csv);
            gp += std::string(i == 0 ? " " : ", \\\n     ") + single_quoted(name) + " using 1:2 with linespoints title " +
                  single_quoted(labels[i]);
        }
        if (gnuplot) write_text((std::filesystem::path(f.outdir) / (f.family + ".gp")).string(), gp + "\n");
        return 0;
    }
    std::string csv = "n";
    for (const auto& label : labels) csv += "," + label;
    csv += '\n';
    for (int n = 1; n <= n_max; ++n) {
        csv += std::to_string(n);
        for (const auto& curve : curves) csv += ',' + sig12(curve[n]);
        csv += '\n';
    }
    write_text(out, csv);
    if (gnuplot)
        write_text(out + ".gp", gnuplot_script(out, static_cast<int>(curves.size()) + 1,
                                               f.family + ", lambda=" + sig12(lambda)));
    return 0;
}

int run_stability(const ModelFlags& f) {
    const auto service = parse_service(f.dist);
    const auto batch = parse_batch(f.batch);
    const auto model = make_model(f.lambda, service.get(), batch.get(), parse_discipline(f.discipline));
    char* text = nullptr;
    check(maxq_stability_describe(model.get(), &text));
    std::cout << take(text) << "\n";
    maxq_stability st{};
    check(maxq_stability_compute(model.get(), &st));
    if (f.strict && !st.stable) throw Failure{kExitNumeric, "model is unstable (--strict)"};
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Busy-period maximum queue length for M^X/G/1 queues under preemptive LCFS disciplines"};
    app.require_subcommand(1);
    app.set_version_flag("--version", maxq_version());

    ModelFlags model;
    int b_max = 20;
    std::string out;
    bool gnuplot = false;

    const auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--out", out, "output file (default: stdout)");
        cmd->add_flag("--gnuplot", gnuplot, "also write <out>.gp, a gnuplot script");
    };

    auto* analyze = app.add_subcommand("analyze", "exact CDF table of the busy-period maximum");
    add_model_flags(analyze, model);
    analyze->add_option("--lambda", model.lambda, "arrival rate of batches")->required();
    analyze->add_option("--bmax", b_max, "largest b")->capture_default_str()->check(CLI::PositiveNumber);
    add_output(analyze);

    SimFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of the same CDF");
    add_model_flags(simulate, model);
    simulate->add_option("--lambda", model.lambda, "arrival rate of batches")->required();
    simulate->add_option("--nmax", sim.n_max, "largest n")->capture_default_str()->check(CLI::PositiveNumber);
    simulate->add_option("--replications", sim.replications, "busy periods")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "root seed (default 42, or $MAXQ_SEED)");
    simulate->add_option("--threads", sim.threads, "worker threads (0: all cores)")->capture_default_str();
    simulate->add_option("--max-events", sim.max_events, "event cap per busy period (0: 10^7)");
    simulate->add_option("--max-queue", sim.max_queue, "queue cap per busy period (0: 10^5)");
    add_output(simulate);

    CompareFlags cmp;
    auto* compare = app.add_subcommand("compare", "check the ordering premise and the dominance of two service laws");
    add_model_flags(compare, model, false);
    compare->add_option("--distA", cmp.dist_a, "service law A (the candidate smaller maximum)")->required();
    compare->add_option("--distB", cmp.dist_b, "service law B")->required();
    compare->add_option("--lambda", cmp.lambda, "arrival rate shared by A and B");
    compare->add_option("--lambdaA", cmp.lambda_a, "arrival rate for A (must equal B's)");
    compare->add_option("--lambdaB", cmp.lambda_b, "arrival rate for B (must equal A's)");
    compare->add_option("--bmax", b_max, "largest b")->capture_default_str()->check(CLI::PositiveNumber);
    compare->add_option("--tol", cmp.tolerance, "allowed P_A(b) - P_B(b) shortfall")->capture_default_str();
    add_output(compare);

    auto* stability = app.add_subcommand("stability", "effective service time and offered load");
    add_model_flags(stability, model);
    stability->add_option("--lambda", model.lambda, "arrival rate of batches")->required();

    FigureFlags fig;
    auto* figures = app.add_subcommand("figures", "resume-discipline curves for a family of mean-1 service laws");
    figures->add_option("--family", fig.family, "uniform, pareto or hyperexp")->required();
    figures->add_option("--params", fig.params, "family parameters (default set if omitted)")->delimiter(',');
    figures->add_option("--lambda", fig.lambda, "override the family's arrival rate");
    figures->add_option("--nmax", fig.n_max, "override the family's largest n")->check(CLI::PositiveNumber);
    figures->add_option("--outdir", fig.outdir, "write one CSV per member here");
    add_output(figures);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gnuplot && out.empty() && !(figures->parsed() && !fig.outdir.empty()))
            throw Failure{kExitUsage, "--gnuplot needs --out" + std::string(figures->parsed() ? " or --outdir" : "")};
        if (analyze->parsed()) return run_analyze(model, b_max, out, gnuplot);
        if (simulate->parsed()) return run_simulate(model, sim, out, gnuplot);
        if (compare->parsed()) return run_compare(model, cmp, b_max, out, gnuplot);
        if (stability->parsed()) return run_stability(model);
        if (figures->parsed()) return run_figures(fig, out, gnuplot);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
