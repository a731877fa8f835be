#include "pq/error.hpp"
#include "pq/service.hpp"

#include "test_support.hpp"

#include "httplib.h"
#include "json.hpp"

#include <thread>

using namespace pq;
using namespace pq::service;
using nlohmann::json;

namespace {

constexpr Timestamp kNow = 1'760'788'800;  // 2025-10-18T12:00:00Z

ServiceConfig test_config(const std::filesystem::path& dir, bool test_mode = true) {
    ServiceConfig config;
    config.data_dir = dir;
    config.test_mode = test_mode;
    return config;
}

struct Client {
    Api& api;
    Timestamp now = kNow;

    Response call(const std::string& method, const std::string& path, const json& body = nullptr,
                  std::map<std::string, std::string> headers = {}) {
        Request r;
        r.method = method;
        r.path = path;
        r.body = body.is_null() ? "" : body.dump();
        r.headers = std::move(headers);
        r.headers.emplace("X-Now", std::to_string(now));
        return api.handle(r);
    }
};

json parse(const Response& r) { return json::parse(r.body); }

std::string error_code(const Response& r) { return parse(r).at("error").at("code").get<std::string>(); }

// Index of the right answer, worked out from the visible stem only.
int solve(const json& card) {
    const auto kind = parse_pattern_kind(card.at("kind").get<std::string>());
    const auto stem = card.at("stem").get<std::vector<std::int64_t>>();
    const auto answer = next_term(*kind, stem);
    const auto choices = card.at("choices").get<std::vector<std::int64_t>>();
    return static_cast<int>(std::find(choices.begin(), choices.end(), answer) - choices.begin());
}

// Plays turns until the game ends, answering wrongly on the listed turns.
// Returns a log of the exchanged bodies; stops after `max_turns` turns.
std::string play(Client& client, const std::string& sid, int first_turn, int max_turns, const std::set<int>& wrong) {
    std::string log;
    for (int turn = first_turn; turn < first_turn + max_turns; ++turn) {
        const auto session = parse(client.call("GET", "/sessions/" + sid));
        if (session.at("phase") == "Victory" || session.at("phase") == "GameOver") break;
        const auto roll = client.call("POST", "/sessions/" + sid + "/roll");
        REQUIRE(roll.status == 200);
        const auto rolled = parse(roll);
        int choice = solve(rolled.at("card"));
        if (wrong.count(turn)) choice = (choice + 1) % 4;
        const auto answer = client.call("POST", "/sessions/" + sid + "/answer", {{"choice", choice}});
        REQUIRE(answer.status == 200);
        const auto answered = parse(answer);
        log += "turn " + std::to_string(turn) + " dice " + std::to_string(rolled.at("dice").get<int>()) + " card " +
               rolled.at("card").at("id").get<std::string>() + " -> " + answered.at("turn").dump() + " wallet " +
               answered.at("wallet").dump() + "\n";
    }
    return log;
}

}  // namespace

TEST_CASE("status mapping") {
    CHECK(http_status(ErrorCode::IllegalPhase) == 409);
    CHECK(http_status(ErrorCode::DuplicateName) == 409);
    CHECK(http_status(ErrorCode::NotFound) == 404);
    CHECK(http_status(ErrorCode::InvalidName) == 400);
    CHECK(http_status(ErrorCode::InsufficientPoints) == 422);
    CHECK(http_status(ErrorCode::EnergyDepleted) == 422);
    CHECK(http_status(ErrorCode::LoadCorrupt) == 500);
    const auto body = json::parse(render_error({ErrorCode::NotFound, 404, "nope"}));
    CHECK(body == json{{"error", {{"code", "NotFound"}, {"status", 404}, {"message", "nope"}}}});
}

TEST_CASE("player endpoints") {
    test::TempDir dir;
    Api api(test_config(dir.path()));
    Client c{api};

    const auto created = c.call("POST", "/players", {{"name", "Ana"}});
    CHECK(created.status == 201);
    const auto ana = parse(created);
    CHECK(ana.at("player_id") == "p-000001");
    CHECK(ana.at("wallet").at("points") == 0);
    CHECK(ana.at("wallet").at("energy") == 5);
    CHECK(ana.at("wallet").at("active_avatar") == "starter");

    const auto dup = c.call("POST", "/players", {{"name", "ana"}});
    CHECK(dup.status == 409);
    CHECK(error_code(dup) == "DuplicateName");
    CHECK(c.call("POST", "/players", {{"name", ""}}).status == 400);
    CHECK(c.call("POST", "/players", {{"nick", "x"}}).status == 400);
    Request raw{"POST", "/players", "{not json", {}};
    CHECK(error_code(api.handle(raw)) == "BadRequest");

    CHECK(c.call("GET", "/players/p-000001").status == 200);
    const auto missing = c.call("GET", "/players/p-000404");
    CHECK(missing.status == 404);
    CHECK(error_code(missing) == "NotFound");
    CHECK(c.call("DELETE", "/players/p-000001").status == 404);

    const auto settings = c.call("PUT", "/players/p-000001/settings", {{"music_on", false}, {"volume", 30}});
    CHECK(settings.status == 200);
    CHECK(parse(c.call("GET", "/players/p-000001")).at("settings") == json{{"music_on", false}, {"volume", 30}});
    CHECK(error_code(c.call("PUT", "/players/p-000001/settings", {{"volume", 150}})) == "InvalidSettings");
    CHECK(error_code(c.call("PUT", "/players/p-000001/settings", {{"music_on", "no"}})) == "BadRequest");
}

TEST_CASE("shop endpoints") {
    test::TempDir dir;
    Api api(test_config(dir.path()));
    Client c{api};
    c.call("POST", "/players", {{"name", "Ana"}});

    const auto catalog = parse(c.call("GET", "/catalog/avatars"));
    CHECK(catalog.at("avatars").size() == 4);
    CHECK(catalog.at("avatars").at(3) ==
          json{{"avatar_id", "dragon"}, {"display_name", "Dragon"}, {"price", 600}, {"perk", "Premium"}});

    const auto poor = c.call("POST", "/players/p-000001/shop/purchase", {{"avatar_id", "dragon"}});
    CHECK(poor.status == 422);
    CHECK(error_code(poor) == "InsufficientPoints");
    CHECK(parse(poor).at("error").at("message").get<std::string>().find("need 600 more") != std::string::npos);
    CHECK(error_code(c.call("POST", "/players/p-000001/shop/purchase", {{"avatar_id", "unicorn"}})) ==
          "UnknownAvatar");
    CHECK(error_code(c.call("POST", "/players/p-000001/avatar", {{"avatar_id", "wizard"}})) == "NotOwned");

    {
        auto lock = api.store().lock_player("p-000001");
        auto profile = api.store().load_profile("p-000001", kNow);
        profile.wallet.points = 600;
        api.store().save_profile(profile);
    }
    const auto bought = parse(c.call("POST", "/players/p-000001/shop/purchase", {{"avatar_id", "dragon"}}));
    CHECK(bought.at("wallet").at("points") == 0);
    CHECK(error_code(c.call("POST", "/players/p-000001/shop/purchase", {{"avatar_id", "dragon"}})) == "AlreadyOwned");
    const auto equipped = parse(c.call("POST", "/players/p-000001/avatar", {{"avatar_id", "dragon"}}));
    CHECK(equipped.at("wallet").at("active_avatar") == "dragon");
    CHECK(equipped.at("wallet").at("energy_max") == 7);
}

TEST_CASE("session endpoints and energy") {
    test::TempDir dir;
    Api api(test_config(dir.path()));
    Client c{api};
    c.call("POST", "/players", {{"name", "Ana"}});

    const auto started = c.call("POST", "/players/p-000001/sessions", {{"difficulty", "medium"}}, {{"X-Seed", "7"}});
    CHECK(started.status == 201);
    const auto s = parse(started);
    CHECK(s.at("session_id") == "s-000001");
    CHECK(s.at("phase") == "AwaitingRoll");
    CHECK(s.at("difficulty") == "Medium");
    CHECK(s.at("lifelines") == 3);
    CHECK(parse(c.call("GET", "/players/p-000001")).at("wallet").at("energy") == 4);

    CHECK(error_code(c.call("POST", "/sessions/s-000001/answer", {{"choice", 0}})) == "IllegalPhase");
    const auto rolled = parse(c.call("POST", "/sessions/s-000001/roll"));
    CHECK_FALSE(rolled.at("card").contains("correct_index"));
    CHECK(rolled.at("card").at("difficulty") == "Medium");
    const auto again = c.call("POST", "/sessions/s-000001/roll");
    CHECK(again.status == 409);
    CHECK(error_code(again) == "IllegalPhase");
    CHECK(error_code(c.call("POST", "/sessions/s-000001/answer", {{"choice", 4}})) == "ChoiceOutOfRange");
    CHECK(error_code(c.call("POST", "/sessions/s-000001/answer", {{"choice", "a"}})) == "BadRequest");
    CHECK(error_code(c.call("POST", "/sessions/s-000404/roll")) == "NotFound");
    CHECK(error_code(c.call("POST", "/players/p-000001/sessions", {{"difficulty", "insane"}})) == "BadRequest");

    for (int i = 0; i < 4; ++i) CHECK(c.call("POST", "/players/p-000001/sessions").status == 201);
    const auto empty = c.call("POST", "/players/p-000001/sessions");
    CHECK(empty.status == 422);
    CHECK(error_code(empty) == "EnergyDepleted");

    c.now += 20 * 60;
    CHECK(c.call("POST", "/players/p-000001/sessions").status == 201);
    const auto profile = parse(c.call("GET", "/players/p-000001"));
    CHECK(profile.at("stats").at("games_played") == 6);
    CHECK(profile.at("sessions").size() == 6);
}

TEST_CASE("test-only headers are refused in production mode") {
    test::TempDir dir;
    Api api(test_config(dir.path(), false));
    Request r{"POST", "/players", json{{"name", "Ana"}}.dump(), {}};
    CHECK(api.handle(r).status == 201);
    Request seeded{"POST", "/players/p-000001/sessions", "", {{"X-Seed", "42"}}};
    CHECK(api.handle(seeded).status == 400);
    Request timed{"GET", "/players/p-000001", "", {{"x-now", "1"}}};
    CHECK(api.handle(timed).status == 400);
    Request plain{"POST", "/players/p-000001/sessions", "", {}};
    CHECK(api.handle(plain).status == 201);
}

TEST_CASE("golden game resumes identically across a restart") {
    const std::set<int> wrong = {2, 5};

    // Uninterrupted run.
    test::TempDir straight_dir;
    std::string straight;
    json straight_session;
    json straight_profile;
    {
        Api api(test_config(straight_dir.path()));
        Client c{api};
        c.call("POST", "/players", {{"name", "Ana"}});
        c.call("POST", "/players/p-000001/sessions", nullptr, {{"X-Seed", "42"}});
        straight = play(c, "s-000001", 1, 1000, wrong);
        straight_session = parse(c.call("GET", "/sessions/s-000001"));
        straight_profile = parse(c.call("GET", "/players/p-000001"));
    }

    // Same game with the service torn down after three turns, and once more
    // with a roll left pending across the restart.
    for (bool pending_across_restart : {false, true}) {
        test::TempDir dir;
        std::string resumed;
        {
            Api api(test_config(dir.path()));
            Client c{api};
            c.call("POST", "/players", {{"name", "Ana"}});
            c.call("POST", "/players/p-000001/sessions", nullptr, {{"X-Seed", "42"}});
            resumed = play(c, "s-000001", 1, 3, wrong);
            if (pending_across_restart) c.call("POST", "/sessions/s-000001/roll");
        }
        {
            Api api(test_config(dir.path()));
            Client c{api};
            if (pending_across_restart) {
                const auto session = parse(c.call("GET", "/sessions/s-000001"));
                REQUIRE(session.at("phase") == "AwaitingAnswer");
                const auto card = session.at("pending").at("card");
                const int choice = solve(card);
                const auto answered = parse(c.call("POST", "/sessions/s-000001/answer", {{"choice", choice}}));
                resumed += "turn 4 dice " + std::to_string(session.at("pending").at("dice").get<int>()) + " card " +
                           card.at("id").get<std::string>() + " -> " + answered.at("turn").dump() + " wallet " +
                           answered.at("wallet").dump() + "\n";
                resumed += play(c, "s-000001", 5, 1000, wrong);
            } else {
                resumed += play(c, "s-000001", 4, 1000, wrong);
            }
            CHECK(parse(c.call("GET", "/sessions/s-000001")) == straight_session);
            CHECK(parse(c.call("GET", "/players/p-000001")) == straight_profile);
        }
        CHECK(resumed == straight);
    }

    // The HTTP-level game agrees with an engine-level replay.
    std::vector<int> choices;
    for (const auto& turn : straight_session.at("transcript")) choices.push_back(turn.at("answer_index").get<int>());
    SessionOptions options;
    options.session_id = "s-000001";
    options.player_id = "p-000001";
    const auto engine = replay(BoardSpec::default30(), 42, options, GeneratorConfig::defaults(), choices);
    CHECK(straight_session.at("phase") == std::string(to_string(engine.phase)));
    CHECK(straight_session.at("points") == engine.total_points());

    const std::string golden = test::read_text(std::string(PQ_TEST_DIR) + "/golden/service_session.txt");
    REQUIRE_FALSE(golden.empty());
    CHECK(straight + render_transcript(engine) == golden);
}

TEST_CASE("quests through the API") {
    test::TempDir dir;
    Api api(test_config(dir.path()));
    Client c{api};
    c.call("POST", "/players", {{"name", "Ana"}});
    const auto quests = parse(c.call("GET", "/players/p-000001/quests"));
    CHECK(quests.at("day") == "2025-10-18");
    CHECK(quests.at("quests").size() == 2);
    CHECK(quests.at("quests").at(0).at("progress") == 0);

    c.call("POST", "/players/p-000001/sessions", nullptr, {{"X-Seed", "42"}});
    play(c, "s-000001", 1, 1000, {});
    const auto after = parse(c.call("GET", "/players/p-000001/quests"));
    const auto session = parse(c.call("GET", "/sessions/s-000001"));
    CHECK(session.at("phase") == "Victory");
    CHECK(after.at("quests").at(1).at("claimed") == true);
    const auto points = parse(c.call("GET", "/players/p-000001")).at("wallet").at("points").get<std::int64_t>();
    const bool ten_claimed = after.at("quests").at(0).at("claimed").get<bool>();
    CHECK(points == session.at("points").get<std::int64_t>() + 25 + (ten_claimed ? 25 : 0));

    c.now += 86'400;
    CHECK(parse(c.call("GET", "/players/p-000001/quests")).at("quests").at(1).at("claimed") == false);
}

TEST_CASE("HTTP loopback") {
    test::TempDir dir;
    ServiceConfig config = test_config(dir.path());
    config.port = 0;
    Server server(config, [] { return kNow; });
    REQUIRE(server.port() > 0);
    std::thread runner([&] { server.run(); });

    httplib::Client client("127.0.0.1", server.port());
    client.set_connection_timeout(5);
    httplib::Result created;
    for (int attempt = 0; attempt < 50 && !created; ++attempt) {
        created = client.Post("/players", R"({"name":"Ana"})", "application/json");
        if (!created) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    REQUIRE(created);
    CHECK(created->status == 201);
    CHECK(json::parse(created->body).at("player_id") == "p-000001");

    const auto session = client.Post("/players/p-000001/sessions", httplib::Headers{{"X-Seed", "42"}}, "",
                                     "application/json");
    REQUIRE(session);
    CHECK(session->status == 201);
    const auto roll = client.Post("/sessions/s-000001/roll");
    REQUIRE(roll);
    CHECK(json::parse(roll->body).at("dice") == 2);
    const auto conflict = client.Post("/sessions/s-000001/roll");
    REQUIRE(conflict);
    CHECK(conflict->status == 409);
    CHECK(json::parse(conflict->body).at("error").at("code") == "IllegalPhase");

    server.stop();
    runner.join();
}
