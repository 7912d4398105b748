#pragma once

#include "flash/pipeline/flag_store.hpp"
#include "flash/pipeline/state_dir.hpp"

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace flash {

/// HTTP review API over a state directory. All bodies are JSON.
///
///   GET  /health
///   GET  /flags?date=YYYY-MM-DD[&window=n]          ranked flags, 404 if none that day
///   GET  /streams/{region}/detail?date=YYYY-MM-DD   series, regimes and score breakdown
///   POST /flags/{region}/{date}/review              {"reviewed": bool, "note": string|null}
///   POST /retrain                                   202; retrains in the background
///
/// Reads run concurrently; reviews and retrains are serialized.
class ReviewService {
public:
    explicit ReviewService(StateDir dir);
    ~ReviewService();

    ReviewService(const ReviewService&) = delete;
    ReviewService& operator=(const ReviewService&) = delete;

    /// Binds and serves until stop(); returns false if the port could not be bound.
    bool listen(const std::string& host, int port);
    /// Binds to an ephemeral port and returns it; call run() afterwards.
    int bind_any(const std::string& host);
    void run();
    void stop();

    /// Blocks until any background retrain has finished.
    void wait_for_retrain();
    std::size_t retrains_completed() const { return retrains_completed_; }

private:
    void routes();
    std::shared_ptr<const StateSnapshot> snapshot() const;
    void start_retrain();

    StateDir dir_;
    std::unique_ptr<httplib::Server> server_;
    FlagStore flags_;

    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const StateSnapshot> snapshot_;

    std::mutex retrain_mutex_;
    std::thread retrain_thread_;
    std::atomic<bool> retrain_running_{false};
    std::atomic<std::size_t> retrains_completed_{0};
    std::string last_retrain_error_;
};

}  // namespace flash
