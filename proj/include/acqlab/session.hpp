#pragma once

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "acqlab/harness.hpp"

namespace acqlab {

enum class Phase { Generating, AwaitingAnswer, Converged, PrematureConvergence, Collapsed, Aborted };

std::string_view phase_name(Phase p) noexcept;
bool terminal(Phase p) noexcept;

class Session;

// Sessions run on their own thread; an interactive session blocks in its
// oracle until answer() hands over a reply. All calls return protocol JSON
// and throw Error (UnknownSession, WrongPhase, InvalidInstance, InvalidParams).
class SessionManager {
public:
    explicit SessionManager(Seconds idle_timeout = std::chrono::minutes(30));
    ~SessionManager();
    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;

    // {"benchmark": name, "size"?, "seed"?} or {"instance": {...}},
    // "config"?: {...}, "mode"?: "human" | "simulated"
    json create(const json& request);
    // Blocks up to `wait` while the session is generating.
    json get(const std::string& id, Seconds wait = Seconds(0));
    // reply is "yes" or "no"; query_index, when given, must match the pending query.
    json answer(const std::string& id, const std::string& reply, std::optional<std::size_t> query_index = {});
    json transcript(const std::string& id);
    void remove(const std::string& id);

    std::size_t size() const;
    std::size_t evict_idle();

private:
    std::shared_ptr<Session> find(const std::string& id) const;
    void janitor();

    Seconds idle_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
    std::condition_variable stop_cv_;
    bool stopping_ = false;
    std::thread janitor_;
};

// HTTP front end over a SessionManager.
//   POST   /sessions                  create
//   GET    /sessions/{id}?wait=ms     state, pending query
//   POST   /sessions/{id}/answer      {"answer": "yes"|"no", "query"?: k}
//   GET    /sessions/{id}/transcript
//   DELETE /sessions/{id}
class HttpService {
public:
    explicit HttpService(SessionManager& mgr);
    ~HttpService();

    // Returns the bound port (useful with port 0). Throws Io.
    int bind(const std::string& host, int port);
    void listen();  // blocks until stop()
    void start();   // listen() on a background thread
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

int http_status(ErrorCode c) noexcept;
std::string_view error_code_name(ErrorCode c) noexcept;

}  // namespace acqlab
