#pragma once

#include "pq/economy.hpp"
#include "pq/error.hpp"
#include "pq/gameplay.hpp"
#include "pq/pattern_bank.hpp"
#include "pq/persistence.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>

namespace pq::service {

/// Wire shape of every 4xx/5xx body:
///   {"error": {"code": "IllegalPhase", "status": 409, "message": "..."}}
struct ApiError {
    ErrorCode code = ErrorCode::Internal;
    int http_status = 500;
    std::string message;
};

/// 409 state conflicts, 404 missing, 400 invalid input, 422 rule violations,
/// 500 storage faults.
int http_status(ErrorCode code) noexcept;
ApiError to_api_error(const Error& error);
std::string render_error(const ApiError& error);

struct ServiceConfig {
    std::filesystem::path data_dir = "data";
    std::string bind_host = "127.0.0.1";
    int port = 8080;
    /// Enables the X-Seed and X-Now request headers.
    bool test_mode = false;
    GeneratorConfig generator = GeneratorConfig::defaults();
    EconomyConfig economy;
    AvatarCatalog catalog = AvatarCatalog::defaults();
    BoardSpec board = BoardSpec::default30();
    Difficulty default_difficulty = Difficulty::Easy;
};

struct Request {
    std::string method;
    std::string path;
    std::string body;
    /// Header names are matched case-insensitively.
    std::map<std::string, std::string> headers;

    std::string header(const std::string& name) const;
};

struct Response {
    int status = 200;
    std::string body;
};

using Clock = std::function<Timestamp()>;

Timestamp system_now();

/// Routes requests onto the engine. All state lives in the ProfileStore, so
/// a new Api over the same data directory continues where another left off.
class Api {
public:
    explicit Api(ServiceConfig config, Clock clock = system_now);

    Response handle(const Request& request);

    const ServiceConfig& config() const noexcept { return config_; }
    ProfileStore& store() noexcept { return store_; }

private:
    Response dispatch(const Request& request, Timestamp now);

    Response register_player(const Request& request, Timestamp now);
    Response get_player(const std::string& player_id, Timestamp now);
    Response put_settings(const std::string& player_id, const Request& request, Timestamp now);
    Response get_catalog();
    Response purchase(const std::string& player_id, const Request& request, Timestamp now);
    Response equip(const std::string& player_id, const Request& request, Timestamp now);
    Response get_quests(const std::string& player_id, Timestamp now);
    Response start_session(const std::string& player_id, const Request& request, Timestamp now);
    Response get_session(const std::string& session_id);
    Response roll(const std::string& session_id);
    Response answer(const std::string& session_id, const Request& request, Timestamp now);

    std::uint64_t draw_seed(const Request& request);

    ServiceConfig config_;
    Clock clock_;
    ProfileStore store_;
};

/// HTTP front end over an Api.
class Server {
public:
    /// Binds immediately. Port 0 picks a free port. Throws Error{BindFailure},
    /// Error{DataDirUnwritable}.
    explicit Server(ServiceConfig config, Clock clock = system_now);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    int port() const noexcept { return port_; }

    /// Blocks serving requests until stop().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace pq::service
