#include "acqlab/session.hpp"

#include <httplib.h>

namespace acqlab {

std::string_view phase_name(Phase p) noexcept {
    switch (p) {
        case Phase::Generating: return "generating";
        case Phase::AwaitingAnswer: return "awaiting_answer";
        case Phase::Converged: return "converged";
        case Phase::PrematureConvergence: return "premature_convergence";
        case Phase::Collapsed: return "collapsed";
        case Phase::Aborted: return "aborted";
    }
    return "?";
}

bool terminal(Phase p) noexcept { return p != Phase::Generating && p != Phase::AwaitingAnswer; }

int http_status(ErrorCode c) noexcept {
    switch (c) {
        case ErrorCode::UnknownSession: return 404;
        case ErrorCode::WrongPhase: return 409;
        case ErrorCode::Internal:
        case ErrorCode::Io: return 500;
        default: return 400;
    }
}

std::string_view error_code_name(ErrorCode c) noexcept {
    switch (c) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnknownBenchmark: return "UnknownBenchmark";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::InvalidInstance: return "InvalidInstance";
        case ErrorCode::Io: return "Io";
        case ErrorCode::UnknownSession: return "UnknownSession";
        case ErrorCode::WrongPhase: return "WrongPhase";
        case ErrorCode::Internal: return "Internal";
    }
    return "?";
}

namespace {

using SteadyTime = std::chrono::steady_clock::time_point;

struct Exchange {
    Assignment query;
    bool answer = false;
};

}  // namespace

class Session : public Oracle {
public:
    Session(std::string id, Instance inst, AcquisitionConfig cfg, bool simulated, bool has_target)
        : id_(std::move(id)), inst_(std::move(inst)), cfg_(std::move(cfg)), simulated_(simulated),
          has_target_(has_target), sim_(inst_.vocab.size(), inst_.target),
          touched_(std::chrono::steady_clock::now()) {}

    ~Session() override {
        abort();
        if (worker_.joinable()) worker_.join();
    }

    void start() {
        worker_ = std::thread([this] { body(); });
    }

    bool ask(const Assignment& e) override {
        if (simulated_) {
            const bool a = sim_.classify(e);
            std::lock_guard lk(mu_);
            if (aborted_) throw OracleAborted();
            transcript_.push_back({e, a});
            return a;
        }
        std::unique_lock lk(mu_);
        if (aborted_) throw OracleAborted();
        pending_ = e;
        reply_.reset();
        phase_ = Phase::AwaitingAnswer;
        cv_.notify_all();
        cv_.wait(lk, [&] { return aborted_ || reply_.has_value(); });
        if (aborted_) throw OracleAborted();
        const bool a = *reply_;
        pending_.reset();
        reply_.reset();
        return a;
    }

    json snapshot(Seconds wait) {
        std::unique_lock lk(mu_);
        touched_ = std::chrono::steady_clock::now();
        if (wait.count() > 0)
            cv_.wait_for(lk, wait, [&] { return phase_ != Phase::Generating || aborted_; });
        json j = {{"id", id_},
                  {"instance", inst_.name},
                  {"phase", phase_name(phase_)},
                  {"mode", simulated_ ? "simulated" : "human"},
                  {"variables", inst_.vocab.size()},
                  {"queries", transcript_.size()},
                  {"bias", bias_size_}};
        j["config"] = config_to_json(cfg_);
        if (phase_ == Phase::AwaitingAnswer && pending_) {
            j["query"] = {{"index", transcript_.size()},
                          {"assignment", assignment_to_json(*pending_)},
                          {"size", pending_->assigned_count()}};
            // hybrid: the target's answer is offered, the human decides
            if (has_target_) j["query"]["suggestion"] = sim_.classify(*pending_) ? "yes" : "no";
        } else
            j["query"] = nullptr;
        json l = json::array();
        for (const auto& c : learned_) l.push_back(constraint_to_json(c));
        j["learned"] = l;
        j["metrics"] = result_ ? metrics_to_json(result_->metrics) : live_metrics_;
        if (!error_.empty()) j["error"] = error_;
        return j;
    }

    void answer(bool yes, std::optional<std::size_t> index) {
        {
            std::lock_guard lk(mu_);
            touched_ = std::chrono::steady_clock::now();
            if (phase_ != Phase::AwaitingAnswer || reply_)
                throw Error(ErrorCode::WrongPhase, "session " + id_ + " is " + std::string(phase_name(phase_)));
            if (index && *index != transcript_.size())
                throw Error(ErrorCode::WrongPhase, "query " + std::to_string(*index) + " is not pending");
            reply_ = yes;
            transcript_.push_back({*pending_, yes});
            phase_ = Phase::Generating;
        }
        cv_.notify_all();
    }

    json transcript() {
        std::lock_guard lk(mu_);
        touched_ = std::chrono::steady_clock::now();
        json t = json::array();
        for (std::size_t i = 0; i < transcript_.size(); ++i)
            t.push_back({{"index", i},
                         {"assignment", assignment_to_json(transcript_[i].query)},
                         {"answer", transcript_[i].answer ? "yes" : "no"}});
        return {{"id", id_}, {"phase", phase_name(phase_)}, {"transcript", t}};
    }

    void abort() {
        {
            std::lock_guard lk(mu_);
            aborted_ = true;
        }
        cv_.notify_all();
    }

    bool idle_since(SteadyTime cutoff) {
        std::lock_guard lk(mu_);
        return touched_ < cutoff;
    }

private:
    void body() {
        try {
            const Bias bias = inst_.make_bias();
            {
                std::lock_guard lk(mu_);
                bias_size_ = bias.size();
            }
            Acquisition acq(inst_.vocab, bias, *this, cfg_);
            acq.trace().learned = [this](const Constraint& c) {
                std::lock_guard lk(mu_);
                learned_.push_back(c);
            };
            acq.on_progress([this](const Acquisition& a) {
                json m = metrics_to_json(a.metrics());
                std::lock_guard lk(mu_);
                bias_size_ = a.bias().size();
                live_metrics_ = std::move(m);
            });
            auto res = acq.run();
            std::lock_guard lk(mu_);
            switch (res.status) {
                case Outcome::Converged: phase_ = Phase::Converged; break;
                case Outcome::PrematureConvergence: phase_ = Phase::PrematureConvergence; break;
                case Outcome::Collapse: phase_ = Phase::Collapsed; break;
            }
            learned_ = res.learned;
            bias_size_ = res.bias_remaining;
            result_ = std::move(res);
        } catch (const OracleAborted&) {
            std::lock_guard lk(mu_);
            phase_ = Phase::Aborted;
        } catch (const std::exception& e) {
            std::lock_guard lk(mu_);
            phase_ = Phase::Aborted;
            error_ = e.what();
        }
        cv_.notify_all();
    }

    std::string id_;
    Instance inst_;
    AcquisitionConfig cfg_;
    bool simulated_;
    bool has_target_;
    SimulatedOracle sim_;

    std::mutex mu_;
    std::condition_variable cv_;
    Phase phase_ = Phase::Generating;
    std::optional<Assignment> pending_;
    std::optional<bool> reply_;
    bool aborted_ = false;
    std::vector<Exchange> transcript_;
    std::vector<Constraint> learned_;
    std::optional<AcquisitionResult> result_;
    std::size_t bias_size_ = 0;
    json live_metrics_ = json::object();
    std::string error_;
    SteadyTime touched_;
    std::thread worker_;
};

SessionManager::SessionManager(Seconds idle_timeout) : idle_(idle_timeout) {
    janitor_ = std::thread([this] { janitor(); });
}

SessionManager::~SessionManager() {
    {
        std::lock_guard lk(mu_);
        stopping_ = true;
    }
    stop_cv_.notify_all();
    janitor_.join();
    std::map<std::string, std::shared_ptr<Session>> doomed;
    {
        std::lock_guard lk(mu_);
        doomed.swap(sessions_);
    }
    for (auto& [id, s] : doomed) s->abort();
}

void SessionManager::janitor() {
    const auto tick = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::min<Seconds>(idle_ / 4, Seconds(30)));
    std::unique_lock lk(mu_);
    while (!stopping_) {
        stop_cv_.wait_for(lk, tick);
        if (stopping_) break;
        lk.unlock();
        evict_idle();
        lk.lock();
    }
}

std::size_t SessionManager::evict_idle() {
    const auto cutoff = std::chrono::steady_clock::now() -
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(idle_);
    std::vector<std::shared_ptr<Session>> doomed;
    {
        std::lock_guard lk(mu_);
        for (auto it = sessions_.begin(); it != sessions_.end();) {
            if (it->second->idle_since(cutoff)) {
                doomed.push_back(it->second);
                it = sessions_.erase(it);
            } else {
                ++it;
            }
        }
    }
    for (auto& s : doomed) s->abort();
    return doomed.size();  // joined when the last reference drops
}

json SessionManager::create(const json& req) {
    if (!req.is_object()) throw Error(ErrorCode::InvalidInstance, "request must be a JSON object");
    Instance inst;
    bool has_target = true;
    try {
        if (req.contains("instance")) {
            has_target = req.at("instance").contains("target");
            inst = instance_from_json(req.at("instance"));
        } else if (req.contains("benchmark")) {
            BenchmarkParams p;
            if (req.contains("size")) p.size = req.at("size").get<std::size_t>();
            if (req.contains("seed")) p.seed = req.at("seed").get<std::uint64_t>();
            inst = build_benchmark(req.at("benchmark").get<std::string>(), p);
        } else {
            throw Error(ErrorCode::InvalidInstance, "request needs 'instance' or 'benchmark'");
        }
        inst.validate();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInstance, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::UnknownBenchmark || e.code() == ErrorCode::InvalidParams) throw;
        throw Error(ErrorCode::InvalidInstance, e.what());
    }
    AcquisitionConfig cfg;
    if (req.contains("config")) cfg = config_from_json(req.at("config"));
    bool simulated = false;
    if (req.contains("mode")) {
        const auto m = req.at("mode").is_string() ? req.at("mode").get<std::string>() : "";
        if (m == "simulated") simulated = true;
        else if (m != "human") throw Error(ErrorCode::InvalidParams, "mode must be human or simulated");
    }
    if (simulated && !has_target) throw Error(ErrorCode::InvalidParams, "simulated mode needs a target");

    std::shared_ptr<Session> s;
    {
        std::lock_guard lk(mu_);
        const std::string id = "s" + std::to_string(next_id_++);
        s = std::make_shared<Session>(id, std::move(inst), cfg, simulated, has_target);
        sessions_[id] = s;
    }
    s->start();
    return s->snapshot(Seconds(0));
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
    std::lock_guard lk(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
    return it->second;
}

json SessionManager::get(const std::string& id, Seconds wait) { return find(id)->snapshot(wait); }

json SessionManager::answer(const std::string& id, const std::string& reply, std::optional<std::size_t> index) {
    if (reply != "yes" && reply != "no") throw Error(ErrorCode::InvalidParams, "answer must be yes or no");
    auto s = find(id);
    s->answer(reply == "yes", index);
    return s->snapshot(Seconds(0));
}

json SessionManager::transcript(const std::string& id) { return find(id)->transcript(); }

void SessionManager::remove(const std::string& id) {
    std::shared_ptr<Session> s;
    {
        std::lock_guard lk(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
        s = it->second;
        sessions_.erase(it);
    }
    s->abort();
}

std::size_t SessionManager::size() const {
    std::lock_guard lk(mu_);
    return sessions_.size();
}

// ---------------------------------------------------------------- HTTP

struct HttpService::Impl {
    SessionManager* mgr;
    httplib::Server srv;
    std::thread th;
};

namespace {

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        send(res, http_status(e.code()), {{"error", {{"code", error_code_name(e.code())}, {"message", e.what()}}}});
    } catch (const json::exception& e) {
        send(res, 400, {{"error", {{"code", "InvalidInstance"}, {"message", e.what()}}}});
    } catch (const std::exception& e) {
        send(res, 500, {{"error", {{"code", "Internal"}, {"message", e.what()}}}});
    }
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    return json::parse(req.body);
}

}  // namespace

HttpService::HttpService(SessionManager& mgr) : impl_(std::make_unique<Impl>()) {
    impl_->mgr = &mgr;
    auto& srv = impl_->srv;
    SessionManager* m = &mgr;

    srv.Post("/sessions", [m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send(res, 201, m->create(body_of(req))); });
    });
    srv.Get(R"(/sessions/([^/]+))", [m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            double ms = 0;
            if (req.has_param("wait")) {
                try {
                    ms = std::stod(req.get_param_value("wait"));
                } catch (const std::exception&) {
                    throw Error(ErrorCode::InvalidParams, "wait must be a number of milliseconds");
                }
            }
            ms = std::clamp(ms, 0.0, 60000.0);
            send(res, 200, m->get(req.matches[1], Seconds(ms / 1000.0)));
        });
    });
    srv.Post(R"(/sessions/([^/]+)/answer)", [m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json b = body_of(req);
            if (!b.is_object() || !b.contains("answer") || !b["answer"].is_string())
                throw Error(ErrorCode::InvalidParams, "body needs \"answer\": \"yes\" | \"no\"");
            std::optional<std::size_t> idx;
            if (b.contains("query")) idx = b["query"].get<std::size_t>();
            send(res, 200, m->answer(req.matches[1], b["answer"].get<std::string>(), idx));
        });
    });
    srv.Get(R"(/sessions/([^/]+)/transcript)", [m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send(res, 200, m->transcript(req.matches[1])); });
    });
    srv.Delete(R"(/sessions/([^/]+))", [m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            m->remove(req.matches[1]);
            res.status = 204;
        });
    });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
    int p = port;
    if (port == 0) p = impl_->srv.bind_to_any_port(host);
    else if (!impl_->srv.bind_to_port(host, port)) p = -1;
    if (p < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    return p;
}

void HttpService::listen() { impl_->srv.listen_after_bind(); }

void HttpService::start() {
    impl_->th = std::thread([this] { listen(); });
    impl_->srv.wait_until_ready();
}

void HttpService::stop() {
    impl_->srv.stop();
    if (impl_->th.joinable()) impl_->th.join();
}

}  // namespace acqlab
