#include "acqlab/acqlab.h"

#include <cmath>
#include <cstring>

#include "acqlab/session.hpp"

using namespace acqlab;

struct acq_instance {
    Instance inst;
};
struct acq_config {
    AcquisitionConfig cfg;
};
struct acq_report {
    ExperimentReport rep;
    Instance inst;
};
struct acq_sessions {
    std::unique_ptr<SessionManager> mgr;
};
struct acq_server {
    std::unique_ptr<HttpService> http;
};

namespace {

thread_local std::string last_error;

acq_status status_of(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidArgument: return ACQ_ERR_INVALID_ARGUMENT;
        case ErrorCode::UnknownBenchmark: return ACQ_ERR_UNKNOWN_BENCHMARK;
        case ErrorCode::InvalidParams: return ACQ_ERR_INVALID_PARAMS;
        case ErrorCode::InvalidInstance: return ACQ_ERR_INVALID_INSTANCE;
        case ErrorCode::Io: return ACQ_ERR_IO;
        case ErrorCode::UnknownSession: return ACQ_ERR_UNKNOWN_SESSION;
        case ErrorCode::WrongPhase: return ACQ_ERR_WRONG_PHASE;
        case ErrorCode::Internal: return ACQ_ERR_INTERNAL;
    }
    return ACQ_ERR_INTERNAL;
}

template <class F>
acq_status wrap(F&& f) {
    last_error.clear();
    try {
        f();
        return ACQ_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return status_of(e.code());
    } catch (const json::exception& e) {
        last_error = e.what();
        return ACQ_ERR_INVALID_INSTANCE;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return ACQ_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return ACQ_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return ACQ_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void put(char** out, const std::string& s) {
    need(out, "output pointer");
    *out = dup(s);
}

}  // namespace

extern "C" {

const char* acq_version(void) { return "0.1.0"; }
const char* acq_last_error(void) { return last_error.c_str(); }
void acq_string_free(char* s) { std::free(s); }

const char* acq_status_name(acq_status s) {
    switch (s) {
        case ACQ_OK: return "ok";
        case ACQ_ERR_INVALID_ARGUMENT: return "InvalidArgument";
        case ACQ_ERR_UNKNOWN_BENCHMARK: return "UnknownBenchmark";
        case ACQ_ERR_INVALID_PARAMS: return "InvalidParams";
        case ACQ_ERR_INVALID_INSTANCE: return "InvalidInstance";
        case ACQ_ERR_IO: return "Io";
        case ACQ_ERR_UNKNOWN_SESSION: return "UnknownSession";
        case ACQ_ERR_WRONG_PHASE: return "WrongPhase";
        case ACQ_ERR_INTERNAL: return "Internal";
    }
    return "?";
}

acq_status acq_benchmark_list(char** json_out) {
    return wrap([&] {
        json j = json::array();
        for (const auto& b : benchmark_catalog()) j.push_back({{"name", b.name}, {"description", b.description}});
        put(json_out, j.dump());
    });
}

acq_status acq_instance_from_benchmark(const char* name, size_t size, uint64_t seed, int bias_level,
                                       acq_instance** out) {
    return wrap([&] {
        need(name, "name");
        need(out, "out");
        BenchmarkParams p;
        if (size) p.size = size;
        p.seed = seed;
        if (bias_level >= 0) p.bias_level = static_cast<std::size_t>(bias_level);
        *out = new acq_instance{build_benchmark(name, p)};
    });
}

acq_status acq_instance_load(const char* path, acq_instance** out) {
    return wrap([&] {
        need(path, "path");
        need(out, "out");
        *out = new acq_instance{load_instance(path)};
    });
}

acq_status acq_instance_parse(const char* text, acq_instance** out) {
    return wrap([&] {
        need(text, "json text");
        need(out, "out");
        *out = new acq_instance{parse_instance(text)};
    });
}

acq_status acq_instance_save(const acq_instance* inst, const char* path) {
    return wrap([&] {
        need(inst, "instance");
        need(path, "path");
        save_instance(inst->inst, path);
    });
}

acq_status acq_instance_to_json(const acq_instance* inst, char** json_out) {
    return wrap([&] {
        need(inst, "instance");
        put(json_out, instance_to_json(inst->inst).dump(1));
    });
}

acq_status acq_instance_info(const acq_instance* inst, size_t* vars, size_t* target, size_t* bias) {
    return wrap([&] {
        need(inst, "instance");
        if (vars) *vars = inst->inst.vocab.size();
        if (target) *target = inst->inst.target.size();
        if (bias) *bias = inst->inst.make_bias().size();
    });
}

void acq_instance_free(acq_instance* inst) { delete inst; }

acq_status acq_config_new(acq_config** out) {
    return wrap([&] {
        need(out, "out");
        *out = new acq_config{};
    });
}

acq_status acq_config_set(acq_config* cfg, const char* key, const char* value) {
    return wrap([&] {
        need(cfg, "config");
        need(key, "key");
        need(value, "value");
        const std::string k = key, v = value;
        json j;
        if (k == "cutmin" || k == "cutmax" || k == "fas_cutoff") {
            std::size_t used = 0;
            double d = 0;
            try {
                d = std::stod(v, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != v.size() || !std::isfinite(d)) throw Error(ErrorCode::InvalidParams, k + " must be a number");
            j[k] = d;
        } else if (k == "seed") {
            std::size_t used = 0;
            unsigned long long s = 0;
            try {
                s = std::stoull(v, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != v.size()) throw Error(ErrorCode::InvalidParams, "seed must be an unsigned integer");
            j[k] = static_cast<std::uint64_t>(s);
        } else {
            j[k] = v;
        }
        // The cut pair is checked by acq_run, so either end can be set first.
        if (k == "cutmin" || k == "cutmax") {
            if (j[k].get<double>() <= 0) throw Error(ErrorCode::InvalidParams, k + " must be > 0");
            (k == "cutmin" ? cfg->cfg.search.cut_min : cfg->cfg.search.cut_max) = Seconds(j[k].get<double>());
            return;
        }
        AcquisitionConfig next = cfg->cfg;
        next.search.cut_min = next.search.cut_max = Seconds(1);
        next = config_from_json(j, next);
        next.search.cut_min = cfg->cfg.search.cut_min;
        next.search.cut_max = cfg->cfg.search.cut_max;
        cfg->cfg = next;
    });
}

acq_status acq_config_to_json(const acq_config* cfg, char** json_out) {
    return wrap([&] {
        need(cfg, "config");
        put(json_out, config_to_json(cfg->cfg).dump());
    });
}

void acq_config_free(acq_config* cfg) { delete cfg; }

acq_status acq_run(const acq_instance* inst, const acq_config* cfg, size_t runs, uint64_t master_seed,
                   unsigned flags, acq_run_callback cb, void* user, acq_report** out) {
    return wrap([&] {
        need(inst, "instance");
        need(cfg, "config");
        need(out, "out");
        ExperimentPlan plan;
        plan.instance = inst->inst;
        plan.config = cfg->cfg;
        plan.runs = runs;
        plan.master_seed = master_seed;
        plan.curves = flags & ACQ_RUN_CURVES;
        plan.verify = flags & ACQ_RUN_VERIFY;
        RunHook hook;
        if (cb)
            hook = [&](const RunRecord& r) {
                const auto s = run_to_json(r).dump();
                cb(user, r.index, s.c_str());
            };
        auto rep = run_experiment(plan, hook);
        *out = new acq_report{std::move(rep), inst->inst};
    });
}

acq_status acq_report_csv(const acq_report* r, int include_timings, char** out) {
    return wrap([&] {
        need(r, "report");
        put(out, report_csv(r->rep, include_timings != 0));
    });
}

acq_status acq_report_json(const acq_report* r, int include_timings, char** out) {
    return wrap([&] {
        need(r, "report");
        put(out, report_json(r->rep, include_timings != 0).dump(1));
    });
}

acq_status acq_report_counts(const acq_report* r, size_t* runs, size_t* collapsed, size_t* premature,
                             size_t* not_equivalent) {
    return wrap([&] {
        need(r, "report");
        std::size_t c = 0, p = 0, ne = 0;
        for (const auto& run : r->rep.runs) {
            c += run.status == Outcome::Collapse;
            p += run.status == Outcome::PrematureConvergence;
            ne += run.equivalent && !*run.equivalent;
        }
        if (runs) *runs = r->rep.runs.size();
        if (collapsed) *collapsed = c;
        if (premature) *premature = p;
        if (not_equivalent) *not_equivalent = ne;
    });
}

acq_status acq_report_learned(const acq_report* r, size_t index, char** json_out) {
    return wrap([&] {
        need(r, "report");
        if (index >= r->rep.runs.size()) throw Error(ErrorCode::InvalidArgument, "run index out of range");
        Instance inst = r->inst;
        inst.learned = r->rep.runs[index].learned;
        put(json_out, instance_to_json(inst).dump(1));
    });
}

void acq_report_free(acq_report* r) { delete r; }

acq_status acq_verify(const acq_instance* inst, double budget, int* equivalent, char** json_out) {
    return wrap([&] {
        need(inst, "instance");
        need(equivalent, "equivalent");
        if (!inst->inst.learned) throw Error(ErrorCode::InvalidInstance, "instance has no 'learned' network");
        if (!(budget > 0)) throw Error(ErrorCode::InvalidParams, "budget must be > 0");
        const auto& in = inst->inst;
        const auto rep = check_equivalence(in.vocab, *in.learned, in.target, Seconds(budget));
        *equivalent = rep.equivalent ? 1 : (rep.complete ? 0 : -1);
        if (json_out) {
            json a = json::array(), b = json::array();
            for (const auto& c : rep.not_entailed_by_first) a.push_back(constraint_to_json(c));
            for (const auto& c : rep.not_entailed_by_second) b.push_back(constraint_to_json(c));
            put(json_out, json{{"equivalent", rep.equivalent},
                               {"complete", rep.complete},
                               {"target_not_entailed", a},
                               {"learned_not_entailed", b}}
                              .dump(1));
        }
    });
}

acq_status acq_sessions_new(double idle, acq_sessions** out) {
    return wrap([&] {
        need(out, "out");
        if (!(idle > 0)) throw Error(ErrorCode::InvalidParams, "idle timeout must be > 0");
        *out = new acq_sessions{std::make_unique<SessionManager>(Seconds(idle))};
    });
}

acq_status acq_session_create(acq_sessions* m, const char* req, char** json_out) {
    return wrap([&] {
        need(m, "sessions");
        need(req, "request");
        json j;
        try {
            j = json::parse(req);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidInstance, e.what());
        }
        put(json_out, m->mgr->create(j).dump());
    });
}

acq_status acq_session_get(acq_sessions* m, const char* id, double wait, char** json_out) {
    return wrap([&] {
        need(m, "sessions");
        need(id, "id");
        put(json_out, m->mgr->get(id, Seconds(std::max(0.0, wait))).dump());
    });
}

acq_status acq_session_answer(acq_sessions* m, const char* id, const char* answer, char** json_out) {
    return wrap([&] {
        need(m, "sessions");
        need(id, "id");
        need(answer, "answer");
        const auto j = m->mgr->answer(id, answer);
        if (json_out) *json_out = dup(j.dump());
    });
}

acq_status acq_session_transcript(acq_sessions* m, const char* id, char** json_out) {
    return wrap([&] {
        need(m, "sessions");
        need(id, "id");
        put(json_out, m->mgr->transcript(id).dump());
    });
}

acq_status acq_session_delete(acq_sessions* m, const char* id) {
    return wrap([&] {
        need(m, "sessions");
        need(id, "id");
        m->mgr->remove(id);
    });
}

void acq_sessions_free(acq_sessions* m) { delete m; }

acq_status acq_server_new(acq_sessions* m, const char* host, int port, acq_server** out, int* bound) {
    return wrap([&] {
        need(m, "sessions");
        need(host, "host");
        need(out, "out");
        if (port < 0 || port > 65535) throw Error(ErrorCode::InvalidParams, "port out of range");
        auto s = std::make_unique<acq_server>();
        s->http = std::make_unique<HttpService>(*m->mgr);
        const int p = s->http->bind(host, port);
        if (bound) *bound = p;
        *out = s.release();
    });
}

acq_status acq_server_run(acq_server* s) {
    return wrap([&] {
        need(s, "server");
        s->http->listen();
    });
}

acq_status acq_server_start(acq_server* s) {
    return wrap([&] {
        need(s, "server");
        s->http->start();
    });
}

acq_status acq_server_stop(acq_server* s) {
    return wrap([&] {
        need(s, "server");
        s->http->stop();
    });
}

void acq_server_free(acq_server* s) { delete s; }

}  // extern "C"
