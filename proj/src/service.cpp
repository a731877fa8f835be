#include "pq/service.hpp"

#include "text_util.hpp"

#include "httplib.h"
#include "json.hpp"

#include <chrono>
#include <random>

namespace pq::service {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad_request(const std::string& message) {
    throw Error(ErrorCode::BadRequest, message);
}

ordered_json parse_body(const Request& request) {
    if (detail::trim(request.body).empty()) return ordered_json::object();
    try {
        ordered_json body = ordered_json::parse(request.body);
        if (!body.is_object()) bad_request("request body must be a JSON object");
        return body;
    } catch (const ordered_json::parse_error& e) {
        bad_request(std::string("malformed JSON body: ") + e.what());
    }
}

std::string require_string(const ordered_json& body, const char* field) {
    const auto it = body.find(field);
    if (it == body.end() || !it->is_string()) bad_request(std::string("field `") + field + "` must be a string");
    return it->get<std::string>();
}

std::uint64_t parse_u64(const std::string& text, const char* what) {
    if (text.empty() || text.size() > 20 || text.find_first_not_of("0123456789") != std::string::npos) {
        bad_request(std::string(what) + " must be a decimal unsigned integer");
    }
    errno = 0;
    const unsigned long long value = std::strtoull(text.c_str(), nullptr, 10);
    if (errno == ERANGE) bad_request(std::string(what) + " out of range");
    return value;
}

ordered_json card_view(const QuestionCard& card) {
    // The correct index stays server-side until the card is answered.
    return ordered_json{{"id", card.id},
                        {"kind", to_string(card.kind)},
                        {"difficulty", to_string(card.difficulty)},
                        {"stem", card.stem},
                        {"choices", card.choices}};
}

ordered_json turn_view(const TurnRecord& r) {
    return ordered_json{{"dice", r.dice},
                        {"card_id", r.card_id},
                        {"answer_index", r.answer_index},
                        {"correct", r.correct},
                        {"position_before", r.position_before},
                        {"position_after", r.position_after},
                        {"feedback", to_string(r.feedback.tag)},
                        {"message", r.feedback.message()},
                        {"points_delta", r.points_delta}};
}

ordered_json feedback_view(const Feedback& f) {
    return ordered_json{{"tag", to_string(f.tag)}, {"message", f.message()}};
}

ordered_json session_view(const GameSession& s) {
    ordered_json jumps = ordered_json::array();
    for (const auto& [from, to] : s.board.jumps) jumps.push_back({from, to});
    ordered_json transcript = ordered_json::array();
    for (const auto& r : s.transcript) transcript.push_back(turn_view(r));
    ordered_json pending = nullptr;
    if (s.pending) pending = ordered_json{{"dice", s.pending->dice}, {"card", card_view(s.pending->card)}};
    return ordered_json{{"session_id", s.session_id},
                        {"player_id", s.player_id},
                        {"board", {{"name", s.board.name}, {"tile_count", s.board.tile_count}, {"jumps", jumps}}},
                        {"difficulty", to_string(s.difficulty)},
                        {"phase", to_string(s.phase)},
                        {"position", s.position},
                        {"lifelines", s.lifelines},
                        {"lifeline_cap", s.rules.cap},
                        {"consecutive_correct", s.consecutive_correct},
                        {"points", s.total_points()},
                        {"pending", pending},
                        {"transcript", transcript}};
}

ordered_json quests_view(const QuestState& q, const EconomyConfig& economy) {
    const bool correct_claimed = q.claimed.count(std::string(kQuestCorrectAnswers10)) != 0;
    const bool finish_claimed = q.claimed.count(std::string(kQuestFinishOneGame)) != 0;
    return ordered_json{
        {"day", format_day(q.day_key)},
        {"quests",
         ordered_json::array({
             {{"id", kQuestCorrectAnswers10},
              {"target", kCorrectAnswersQuestTarget},
              {"progress", q.correct_answers},
              {"claimed", correct_claimed},
              {"reward", economy.quest_reward}},
             {{"id", kQuestFinishOneGame},
              {"target", 1},
              {"progress", q.finished_game ? 1 : 0},
              {"claimed", finish_claimed},
              {"reward", economy.quest_reward}},
         })}};
}

}  // namespace

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::IllegalPhase:
        case ErrorCode::AlreadyOwned:
        case ErrorCode::DuplicateName: return 409;
        case ErrorCode::NotFound:
        case ErrorCode::UnknownAvatar: return 404;
        case ErrorCode::InvalidName:
        case ErrorCode::InvalidSettings:
        case ErrorCode::ChoiceOutOfRange:
        case ErrorCode::BadRequest:
        case ErrorCode::InvalidInput:
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidBoard:
        case ErrorCode::InconsistentStem: return 400;
        case ErrorCode::InsufficientPoints:
        case ErrorCode::EnergyDepleted:
        case ErrorCode::NotOwned:
        case ErrorCode::OutOfScale:
        case ErrorCode::NoResponses:
        case ErrorCode::MissingDriver: return 422;
        case ErrorCode::LoadCorrupt:
        case ErrorCode::UnsupportedVersion:
        case ErrorCode::DataDirUnwritable:
        case ErrorCode::BindFailure:
        case ErrorCode::Internal: return 500;
    }
    return 500;
}

ApiError to_api_error(const Error& error) {
    return ApiError{error.code(), http_status(error.code()), error.what()};
}

std::string render_error(const ApiError& error) {
    const ordered_json body{
        {"error", {{"code", to_string(error.code)}, {"status", error.http_status}, {"message", error.message}}}};
    return body.dump();
}

std::string Request::header(const std::string& name) const {
    const std::string wanted = detail::to_lower(name);
    for (const auto& [key, value] : headers) {
        if (detail::to_lower(key) == wanted) return value;
    }
    return {};
}

Timestamp system_now() {
    using namespace std::chrono;
    return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

Api::Api(ServiceConfig config, Clock clock)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      store_(config_.data_dir, config_.economy, config_.catalog) {
    config_.generator.validate();
    config_.economy.validate();
    config_.board.validate();
}

Response Api::handle(const Request& request) {
    try {
        Timestamp now = clock_();
        if (const std::string override_now = request.header("X-Now"); !override_now.empty()) {
            if (!config_.test_mode) bad_request("X-Now is only accepted in test mode");
            now = static_cast<Timestamp>(parse_u64(override_now, "X-Now"));
        }
        return dispatch(request, now);
    } catch (const Error& e) {
        const ApiError error = to_api_error(e);
        return Response{error.http_status, render_error(error)};
    } catch (const nlohmann::json::exception& e) {
        const ApiError error{ErrorCode::BadRequest, 400, e.what()};
        return Response{error.http_status, render_error(error)};
    } catch (const std::exception& e) {
        const ApiError error{ErrorCode::Internal, 500, e.what()};
        return Response{error.http_status, render_error(error)};
    }
}

Response Api::dispatch(const Request& request, Timestamp now) {
    std::string path = request.path;
    if (const auto q = path.find('?'); q != std::string::npos) path.resize(q);
    std::vector<std::string> parts;
    for (const auto part : detail::split(path, '/')) {
        if (!part.empty()) parts.emplace_back(part);
    }
    const std::string& method = request.method;
    const std::size_t n = parts.size();

    if (n >= 1 && parts[0] == "players") {
        if (n == 1 && method == "POST") return register_player(request, now);
        if (n == 2 && method == "GET") return get_player(parts[1], now);
        if (n == 3 && parts[2] == "settings" && method == "PUT") return put_settings(parts[1], request, now);
        if (n == 3 && parts[2] == "quests" && method == "GET") return get_quests(parts[1], now);
        if (n == 3 && parts[2] == "sessions" && method == "POST") return start_session(parts[1], request, now);
        if (n == 3 && parts[2] == "avatar" && method == "POST") return equip(parts[1], request, now);
        if (n == 4 && parts[2] == "shop" && parts[3] == "purchase" && method == "POST") {
            return purchase(parts[1], request, now);
        }
    } else if (n == 2 && parts[0] == "catalog" && parts[1] == "avatars" && method == "GET") {
        return get_catalog();
    } else if (n >= 2 && parts[0] == "sessions") {
        if (n == 2 && method == "GET") return get_session(parts[1]);
        if (n == 3 && parts[2] == "roll" && method == "POST") return roll(parts[1]);
        if (n == 3 && parts[2] == "answer" && method == "POST") return answer(parts[1], request, now);
    }
    throw Error(ErrorCode::NotFound, "no route for " + method + " " + path);
}

namespace {

ordered_json profile_view(const PlayerProfile& p, Timestamp now, const EconomyConfig& economy,
                          const AvatarCatalog& catalog) {
    const Wallet wallet = regenerate_energy(p.wallet, now, economy, catalog);
    return ordered_json{
        {"player_id", p.player_id},
        {"name", p.name},
        {"settings", {{"music_on", p.settings.music_on}, {"volume", p.settings.volume}}},
        {"wallet",
         {{"points", wallet.points},
          {"energy", wallet.energy},
          {"energy_max", effective_energy_max(wallet, economy, catalog)},
          {"next_energy_in", seconds_to_next_energy(wallet, now, economy, catalog)},
          {"owned_avatars", wallet.owned_avatars},
          {"active_avatar", wallet.active_avatar}}},
        {"stats",
         {{"games_played", p.stats.games_played},
          {"victories", p.stats.victories},
          {"questions_answered", p.stats.questions_answered},
          {"correct_answers", p.stats.correct_answers}}},
        {"sessions", p.sessions},
        {"created_at", p.created_at},
        {"updated_at", p.updated_at}};
}

}  // namespace

Response Api::register_player(const Request& request, Timestamp now) {
    const ordered_json body = parse_body(request);
    const PlayerProfile profile = store_.register_player(require_string(body, "name"), now);
    return Response{201, profile_view(profile, now, config_.economy, config_.catalog).dump()};
}

Response Api::get_player(const std::string& player_id, Timestamp now) {
    const PlayerProfile profile = store_.load_profile(player_id, now);
    return Response{200, profile_view(profile, now, config_.economy, config_.catalog).dump()};
}

Response Api::put_settings(const std::string& player_id, const Request& request, Timestamp now) {
    const ordered_json body = parse_body(request);
    auto lock = store_.lock_player(player_id);
    PlayerProfile profile = store_.load_profile(player_id, now);
    PlayerSettings settings = profile.settings;
    if (const auto it = body.find("music_on"); it != body.end()) {
        if (!it->is_boolean()) bad_request("field `music_on` must be a boolean");
        settings.music_on = it->get<bool>();
    }
    if (const auto it = body.find("volume"); it != body.end()) {
        if (!it->is_number_integer()) bad_request("field `volume` must be an integer");
        const auto volume = it->get<std::int64_t>();
        if (volume < 0 || volume > 100) throw Error(ErrorCode::InvalidSettings, "volume must be within 0..100");
        settings.volume = static_cast<int>(volume);
    }
    validate_settings(settings);
    profile.settings = settings;
    profile.updated_at = now;
    store_.save_profile(profile);
    return Response{200, profile_view(profile, now, config_.economy, config_.catalog).dump()};
}

Response Api::get_catalog() {
    ordered_json avatars = ordered_json::array();
    for (const Avatar& a : config_.catalog.entries()) {
        avatars.push_back({{"avatar_id", a.id},
                           {"display_name", a.display_name},
                           {"price", a.price},
                           {"perk", a.perk == Perk::Premium ? "Premium" : "None"}});
    }
    return Response{200, ordered_json{{"avatars", avatars}}.dump()};
}

Response Api::purchase(const std::string& player_id, const Request& request, Timestamp now) {
    const ordered_json body = parse_body(request);
    const std::string avatar_id = require_string(body, "avatar_id");
    auto lock = store_.lock_player(player_id);
    PlayerProfile profile = store_.load_profile(player_id, now);
    profile.wallet = purchase_avatar(profile.wallet, avatar_id, config_.catalog);
    profile.updated_at = now;
    store_.save_profile(profile);
    return Response{200, profile_view(profile, now, config_.economy, config_.catalog).dump()};
}

Response Api::equip(const std::string& player_id, const Request& request, Timestamp now) {
    const ordered_json body = parse_body(request);
    const std::string avatar_id = require_string(body, "avatar_id");
    auto lock = store_.lock_player(player_id);
    PlayerProfile profile = store_.load_profile(player_id, now);
    profile.wallet = equip_avatar(regenerate_energy(profile.wallet, now, config_.economy, config_.catalog), avatar_id,
                                  config_.economy, config_.catalog);
    profile.updated_at = now;
    store_.save_profile(profile);
    return Response{200, profile_view(profile, now, config_.economy, config_.catalog).dump()};
}

Response Api::get_quests(const std::string& player_id, Timestamp now) {
    const PlayerProfile profile = store_.load_profile(player_id, now);
    return Response{200, quests_view(roll_quest_day(profile.quests, now), config_.economy).dump()};
}

std::uint64_t Api::draw_seed(const Request& request) {
    const std::string header = request.header("X-Seed");
    if (!header.empty()) {
        if (!config_.test_mode) bad_request("X-Seed is only accepted in test mode");
        return parse_u64(header, "X-Seed");
    }
    std::random_device entropy;
    return (static_cast<std::uint64_t>(entropy()) << 32) ^ entropy();
}

Response Api::start_session(const std::string& player_id, const Request& request, Timestamp now) {
    const ordered_json body = parse_body(request);
    Difficulty difficulty = config_.default_difficulty;
    if (const auto it = body.find("difficulty"); it != body.end()) {
        const auto parsed = it->is_string() ? parse_difficulty(it->get<std::string>()) : std::nullopt;
        if (!parsed) bad_request("field `difficulty` must be easy, medium or hard");
        difficulty = *parsed;
    }
    const std::uint64_t seed = draw_seed(request);

    auto lock = store_.lock_player(player_id);
    PlayerProfile profile = store_.load_profile(player_id, now);
    profile.wallet = consume_energy(profile.wallet, now, config_.economy, config_.catalog);

    SessionOptions options;
    options.session_id = store_.allocate_session_id();
    options.player_id = player_id;
    options.difficulty = difficulty;
    options.scoring = session_scoring(profile.wallet, config_.economy, config_.catalog);
    options.lifelines = lifeline_rules(config_.economy);
    const GameSession session = pq::start_session(config_.board, seed, options);

    store_.save_session(session);
    profile.sessions.push_back(session.session_id);
    ++profile.stats.games_played;
    profile.updated_at = now;
    store_.save_profile(profile);
    return Response{201, session_view(session).dump()};
}

Response Api::get_session(const std::string& session_id) {
    return Response{200, session_view(store_.load_session(session_id)).dump()};
}

Response Api::roll(const std::string& session_id) {
    const std::string player_id = store_.load_session(session_id).player_id;
    auto lock = store_.lock_player(player_id);
    GameSession session = store_.load_session(session_id);
    const RollResult result = roll_dice(session, config_.generator);
    store_.save_session(session);
    const ordered_json body{{"dice", result.dice}, {"card", card_view(result.card)}, {"session", session_view(session)}};
    return Response{200, body.dump()};
}

Response Api::answer(const std::string& session_id, const Request& request, Timestamp now) {
    const ordered_json body = parse_body(request);
    const auto choice = body.find("choice");
    if (choice == body.end() || !choice->is_number_integer()) bad_request("field `choice` must be an integer");
    const auto choice_value = choice->get<std::int64_t>();
    if (choice_value < 0 || choice_value >= static_cast<std::int64_t>(kChoiceCount)) {
        throw Error(ErrorCode::ChoiceOutOfRange, "choice index must be in 0..3");
    }

    const std::string player_id = store_.load_session(session_id).player_id;
    auto lock = store_.lock_player(player_id);
    GameSession session = store_.load_session(session_id);
    const Feedback feedback = answer_question(session, static_cast<int>(choice_value));
    const TurnRecord& record = session.transcript.back();

    PlayerProfile profile = store_.load_profile(player_id, now);
    profile.wallet = credit_points(profile.wallet, record.points_delta);
    ++profile.stats.questions_answered;
    if (record.correct) {
        ++profile.stats.correct_answers;
        std::tie(profile.quests, profile.wallet) =
            record_quest_progress(profile.quests, QuestEvent::CorrectAnswer, now, profile.wallet, config_.economy);
    }
    if (session.phase == Phase::Victory) {
        ++profile.stats.victories;
        std::tie(profile.quests, profile.wallet) =
            record_quest_progress(profile.quests, QuestEvent::GameFinished, now, profile.wallet, config_.economy);
    }
    profile.updated_at = now;

    store_.save_session(session);
    store_.save_profile(profile);

    const ordered_json response{{"feedback", feedback_view(feedback)},
                                {"turn", turn_view(record)},
                                {"session", session_view(session)},
                                {"wallet",
                                 {{"points", profile.wallet.points},
                                  {"energy", profile.wallet.energy},
                                  {"active_avatar", profile.wallet.active_avatar}}}};
    return Response{200, response.dump()};
}

struct Server::Impl {
    Api api;
    httplib::Server http;

    Impl(ServiceConfig config, Clock clock) : api(std::move(config), std::move(clock)) {}
};

Server::Server(ServiceConfig config, Clock clock) : impl_(std::make_unique<Impl>(std::move(config), std::move(clock))) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        Request request;
        request.method = req.method;
        request.path = req.path;
        request.body = req.body;
        for (const auto& [key, value] : req.headers) request.headers.emplace(key, value);
        const Response response = impl_->api.handle(request);
        res.status = response.status;
        res.set_content(response.body, "application/json");
    };
    impl_->http.Get(".*", handler);
    impl_->http.Post(".*", handler);
    impl_->http.Put(".*", handler);
    impl_->http.Delete(".*", handler);

    const ServiceConfig& cfg = impl_->api.config();
    if (cfg.port == 0) {
        port_ = impl_->http.bind_to_any_port(cfg.bind_host);
        if (port_ <= 0) throw Error(ErrorCode::BindFailure, "cannot bind " + cfg.bind_host);
    } else {
        if (!impl_->http.bind_to_port(cfg.bind_host, cfg.port)) {
            throw Error(ErrorCode::BindFailure, "cannot bind " + cfg.bind_host + ":" + std::to_string(cfg.port));
        }
        port_ = cfg.port;
    }
}

Server::~Server() { stop(); }

void Server::run() { impl_->http.listen_after_bind(); }

void Server::stop() {
    // Every mutation is written through to the store before its response is
    // sent, so stopping the listener leaves nothing unflushed.
    impl_->http.stop();
}

}  // namespace pq::service
