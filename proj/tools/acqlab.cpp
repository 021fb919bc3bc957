// acqlab command line. Talks to the library only through acqlab.h.
#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "acqlab/acqlab.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitCollapse = 2;
constexpr int kExitConfig = 3;

struct Failure {
    acq_status status;
    std::string message;
};

void check(acq_status s) {
    if (s != ACQ_OK) throw Failure{s, acq_last_error()};
}

int exit_code(acq_status s) {
    switch (s) {
        case ACQ_ERR_INVALID_ARGUMENT:
        case ACQ_ERR_UNKNOWN_BENCHMARK:
        case ACQ_ERR_INVALID_PARAMS:
        case ACQ_ERR_INVALID_INSTANCE: return kExitConfig;
        default: return kExitFailure;
    }
}

struct Text {
    char* p = nullptr;
    ~Text() { acq_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    ~Handle() { Free(p); }
};
using Instance = Handle<acq_instance, acq_instance_free>;
using Config = Handle<acq_config, acq_config_free>;
using Report = Handle<acq_report, acq_report_free>;
using Sessions = Handle<acq_sessions, acq_sessions_free>;
using Server = Handle<acq_server, acq_server_free>;

void write_file(const std::string& path, const std::string& body) {
    if (path == "-") {
        std::cout << body;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Failure{ACQ_ERR_IO, "cannot write " + path};
    f << body;
    if (!f) throw Failure{ACQ_ERR_IO, "write failed for " + path};
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool ends_with(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

struct BenchOpts {
    std::string benchmark;
    std::string instance;
    std::size_t size = 0;
    std::uint64_t bench_seed = 1;
    int bias_level = -1;

    void add(CLI::App* c, bool allow_file) {
        auto* b = c->add_option("--benchmark,-b", benchmark, "built-in benchmark (see `acqlab list`)");
        if (allow_file) {
            auto* i = c->add_option("--instance,-i", instance, "instance file")->check(CLI::ExistingFile);
            b->excludes(i);
        }
        c->add_option("--size", size, "family size (latin order, golomb marks, exam courses, rlfap variables)");
        c->add_option("--bench-seed", bench_seed, "generator seed for random families");
        c->add_option("--bias-level", bias_level, "widen the language by this many extra relations")
            ->check(CLI::NonNegativeNumber);
    }

    void load(Instance& out) const {
        if (!instance.empty()) check(acq_instance_load(instance.c_str(), &out.p));
        else if (!benchmark.empty())
            check(acq_instance_from_benchmark(benchmark.c_str(), size, bench_seed, bias_level, &out.p));
        else throw Failure{ACQ_ERR_INVALID_PARAMS, "give --benchmark or --instance"};
    }
};

struct RunOpts {
    BenchOpts bench;
    std::string algo = "mquacq", findscope = "2", qgen = "max", var = "domwdeg", val = "random";
    double cutmin = 1.0, cutmax = 5.0, fas_cutoff = 5.0;
    std::size_t runs = 10;
    std::uint64_t seed = 1;
    std::string out, save_learned;
    bool curves = false, verify = false, no_timings = false, quiet = false;
};

void print_run(void* user, size_t index, const char* run_json) {
    if (*static_cast<bool*>(user)) return;
    std::cerr << "run " << index << ": " << run_json << "\n";
}

int cmd_run(RunOpts& o) {
    Instance inst;
    o.bench.load(inst);
    Config cfg;
    check(acq_config_new(&cfg.p));
    const std::pair<const char*, std::string> keys[] = {
        {"algo", o.algo},
        {"findscope", o.findscope},
        {"qgen", o.qgen},
        {"var", o.var},
        {"val", o.val},
        {"cutmin", num(o.cutmin)},
        {"cutmax", num(o.cutmax)},
        {"fas_cutoff", num(o.fas_cutoff)},
    };
    for (const auto& [k, v] : keys) check(acq_config_set(cfg.p, k, v.c_str()));

    unsigned flags = (o.curves ? ACQ_RUN_CURVES : 0) | (o.verify ? ACQ_RUN_VERIFY : 0);
    Report rep;
    check(acq_run(inst.p, cfg.p, o.runs, o.seed, flags, print_run, &o.quiet, &rep.p));

    const bool timings = !o.no_timings;
    Text csv;
    check(acq_report_csv(rep.p, timings, &csv.p));
    if (!o.out.empty()) {
        Text body;
        if (ends_with(o.out, ".json")) check(acq_report_json(rep.p, timings, &body.p));
        else check(acq_report_csv(rep.p, timings, &body.p));
        write_file(o.out, body.str());
    } else {
        std::cout << csv.str();
    }
    if (!o.save_learned.empty()) {
        Text doc;
        check(acq_report_learned(rep.p, 0, &doc.p));
        write_file(o.save_learned, doc.str() + "\n");
    }

    size_t runs = 0, collapsed = 0, premature = 0, mismatched = 0;
    check(acq_report_counts(rep.p, &runs, &collapsed, &premature, &mismatched));
    std::cerr << runs << " runs: " << collapsed << " collapsed, " << premature << " premature";
    if (o.verify) std::cerr << ", " << mismatched << " not equivalent";
    std::cerr << "\n";
    if (collapsed) return kExitCollapse;
    return mismatched ? kExitFailure : kExitOk;
}

int cmd_verify(const std::string& path, double budget) {
    Instance inst;
    check(acq_instance_load(path.c_str(), &inst.p));
    int eq = 0;
    Text report;
    check(acq_verify(inst.p, budget, &eq, &report.p));
    std::cout << report.str() << "\n";
    return eq == 1 ? kExitOk : kExitFailure;
}

int cmd_export(const BenchOpts& b, const std::string& out) {
    Instance inst;
    b.load(inst);
    Text doc;
    check(acq_instance_to_json(inst.p, &doc.p));
    write_file(out, doc.str() + "\n");
    return kExitOk;
}

int cmd_list() {
    Text j;
    check(acq_benchmark_list(&j.p));
    std::cout << j.str() << "\n";
    return kExitOk;
}

acq_server* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) acq_server_stop(g_server);
}

int cmd_serve(const std::string& host, int port, double idle) {
    Sessions mgr;
    check(acq_sessions_new(idle, &mgr.p));
    Server srv;
    int bound = 0;
    check(acq_server_new(mgr.p, host.c_str(), port, &srv.p, &bound));
    std::cerr << "listening on http://" << host << ":" << bound << "\n";
    g_server = srv.p;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    check(acq_server_run(srv.p));
    g_server = nullptr;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acqlab: constraint acquisition workbench"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(acq_version()));

    RunOpts ro;
    auto* run = app.add_subcommand("run", "run an acquisition experiment against a simulated user");
    ro.bench.add(run, true);
    run->add_option("--algo", ro.algo)->check(CLI::IsMember({"quacq", "multiacq", "mquacq"}));
    run->add_option("--findscope", ro.findscope)->check(CLI::IsMember({"1", "2"}));
    run->add_option("--qgen", ro.qgen)->check(CLI::IsMember({"max", "maxb"}));
    run->add_option("--var", ro.var)->check(CLI::IsMember({"domwdeg", "bdeg", "dom", "lex"}));
    run->add_option("--val", ro.val)->check(CLI::IsMember({"random", "lex", "maxv"}));
    run->add_option("--cutmin", ro.cutmin, "seconds")->check(CLI::PositiveNumber);
    run->add_option("--cutmax", ro.cutmax, "seconds")->check(CLI::PositiveNumber);
    run->add_option("--fas-cutoff", ro.fas_cutoff, "FindAllScopes cutoff, seconds")->check(CLI::PositiveNumber);
    run->add_option("--runs", ro.runs)->check(CLI::PositiveNumber);
    run->add_option("--seed", ro.seed, "master seed");
    run->add_option("--out", ro.out, "CSV, or JSON when the name ends in .json");
    run->add_flag("--curves", ro.curves, "keep learning curves (JSON output)");
    run->add_flag("--verify", ro.verify, "check C_L <=> C_T after every run");
    run->add_flag("--no-timings", ro.no_timings, "drop wall-clock columns");
    run->add_option("--save-learned", ro.save_learned, "write run 0 as an instance file with its learned network");
    run->add_flag("--quiet,-q", ro.quiet, "no per-run lines on stderr");

    std::string vpath;
    double budget = 10.0;
    auto* verify = app.add_subcommand("verify", "check a learned network against the target");
    verify->add_option("--instance,-i", vpath, "instance file with 'learned'")->required()->check(CLI::ExistingFile);
    verify->add_option("--budget", budget, "seconds per entailment check")->check(CLI::PositiveNumber);

    BenchOpts eb;
    std::string eout;
    auto* exp = app.add_subcommand("export", "write a benchmark as an instance file");
    eb.add(exp, false);
    exp->get_option("--benchmark")->required();
    exp->add_option("--out,-o", eout, "path, or - for stdout")->required();

    app.add_subcommand("list", "list built-in benchmarks");

    std::string host = "127.0.0.1";
    int port = 8080;
    double idle = 1800;
    auto* serve = app.add_subcommand("serve", "start the interactive session service");
    serve->add_option("--host", host);
    serve->add_option("--port", port)->check(CLI::Range(0, 65535));
    serve->add_option("--idle", idle, "idle session timeout, seconds")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(ro);
        if (*verify) return cmd_verify(vpath, budget);
        if (*exp) return cmd_export(eb, eout);
        if (*serve) return cmd_serve(host, port, idle);
        return cmd_list();
    } catch (const Failure& f) {
        std::cerr << "acqlab: " << acq_status_name(f.status) << ": " << f.message << "\n";
        return exit_code(f.status);
    }
}
