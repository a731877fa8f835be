// pq: operator CLI for the pattern-quest engine.
//
//   pq serve --data-dir DIR [--bind HOST:PORT] [--config DIR] [--test-mode]
//   pq play  --seed N [--script FILE] [--board default30|FILE] [--difficulty easy|medium|hard]
//   pq sim run --accuracy P --games N --seed S [--board default30|FILE]
//   pq sim oracle [--board default30|FILE]
//   pq eval report --input FILE [--instrument FILE] [--format text|csv|structured]
//   pq gen --seed N --count K [--difficulty easy|medium|hard]

#include "pq/evaluator.hpp"
#include "pq/gameplay.hpp"
#include "pq/pattern_bank.hpp"
#include "pq/persistence.hpp"
#include "pq/service.hpp"
#include "pq/simulator.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct EngineConfig {
    pq::GeneratorConfig generator = pq::GeneratorConfig::defaults();
    pq::EconomyConfig economy;
    pq::AvatarCatalog catalog = pq::AvatarCatalog::defaults();
};

// A config directory may hold generator.conf, economy.conf and avatars.conf;
// missing files keep the compiled-in defaults.
EngineConfig load_config(const std::string& dir) {
    EngineConfig config;
    if (dir.empty()) return config;
    const std::filesystem::path root(dir);
    if (!std::filesystem::is_directory(root)) {
        throw pq::Error(pq::ErrorCode::InvalidConfig, "config directory " + dir + " does not exist");
    }
    if (std::filesystem::exists(root / "generator.conf")) {
        config.generator = pq::GeneratorConfig::load((root / "generator.conf").string());
    }
    if (std::filesystem::exists(root / "economy.conf")) {
        config.economy = pq::EconomyConfig::load((root / "economy.conf").string());
    }
    if (std::filesystem::exists(root / "avatars.conf")) {
        config.catalog = pq::AvatarCatalog::load((root / "avatars.conf").string());
    }
    return config;
}

pq::Difficulty difficulty_from(const std::string& text) {
    const auto parsed = pq::parse_difficulty(text);
    if (!parsed) throw CLI::ValidationError("--difficulty", "must be easy, medium or hard");
    return *parsed;
}

std::string card_line(const pq::QuestionCard& card) {
    nlohmann::ordered_json j{{"id", card.id},
                             {"kind", pq::to_string(card.kind)},
                             {"difficulty", pq::to_string(card.difficulty)},
                             {"seed", std::to_string(card.seed)},
                             {"stem", card.stem},
                             {"choices", card.choices},
                             {"correct_index", card.correct_index}};
    return j.dump();
}

// One action per non-empty line: a choice index 0..3, `correct` or `wrong`.
std::vector<std::string> read_script(std::istream& in) {
    std::vector<std::string> actions;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream words(line);
        std::string word;
        while (words >> word) actions.push_back(word);
    }
    return actions;
}

int resolve_action(const std::string& action, const pq::QuestionCard& card) {
    if (action == "correct") return card.correct_index;
    if (action == "wrong") return card.correct_index == 0 ? 1 : 0;
    if (action.size() == 1 && action[0] >= '0' && action[0] <= '3') return action[0] - '0';
    throw pq::Error(pq::ErrorCode::InvalidInput, "script action must be 0..3, correct or wrong; got " + action);
}

int run_play(std::uint64_t seed, const std::string& script, const std::string& board_name,
             const std::string& difficulty, const std::string& config_dir) {
    const EngineConfig config = load_config(config_dir);
    const pq::BoardSpec board = pq::BoardSpec::resolve(board_name);
    pq::SessionOptions options;
    options.session_id = "local";
    options.player_id = "local";
    options.difficulty = difficulty_from(difficulty);
    options.scoring = pq::Scoring{config.economy.points_per_correct, config.economy.victory_bonus};
    options.lifelines = pq::lifeline_rules(config.economy);
    pq::GameSession session = pq::start_session(board, seed, options);

    std::ifstream file;
    std::vector<std::string> actions;
    const bool scripted = !script.empty();
    if (scripted) {
        file.open(script);
        if (!file) throw pq::Error(pq::ErrorCode::InvalidInput, "cannot read " + script);
        actions = read_script(file);
    }
    std::size_t next = 0;
    while (!pq::is_terminal(session.phase)) {
        if (scripted && next == actions.size()) break;
        const pq::RollResult roll = pq::roll_dice(session, config.generator);
        std::string action;
        if (scripted) {
            action = actions[next++];
        } else {
            std::cerr << "rolled " << roll.dice << "  next term of " << roll.card.stem[0] << ", " << roll.card.stem[1]
                      << ", " << roll.card.stem[2] << ", " << roll.card.stem[3] << " ?\n";
            for (std::size_t i = 0; i < roll.card.choices.size(); ++i) {
                std::cerr << "  [" << i << "] " << roll.card.choices[i] << '\n';
            }
            std::cerr << "> " << std::flush;
            if (!(std::cin >> action)) break;
        }
        const pq::Feedback feedback = pq::answer_question(session, resolve_action(action, roll.card));
        if (!scripted) std::cerr << feedback.message() << "  (tile " << session.position << ")\n";
    }
    std::cout << pq::render_transcript(session);
    return 0;
}

std::atomic<pq::service::Server*> g_server{nullptr};

int run_serve(const std::string& data_dir, const std::string& bind, const std::string& config_dir, bool test_mode,
              const std::string& board_name, const std::string& difficulty) {
    const EngineConfig engine = load_config(config_dir);
    pq::service::ServiceConfig config;
    config.data_dir = data_dir;
    config.test_mode = test_mode;
    config.generator = engine.generator;
    config.economy = engine.economy;
    config.catalog = engine.catalog;
    config.board = pq::BoardSpec::resolve(board_name);
    config.default_difficulty = difficulty_from(difficulty);
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--bind", "expected HOST:PORT");
    config.bind_host = bind.substr(0, colon);
    try {
        config.port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
        throw CLI::ValidationError("--bind", "port must be an integer");
    }

    // Block SIGINT/SIGTERM here and wait for them on a helper thread so
    // shutdown runs outside signal context.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    pq::service::Server server(config);
    std::cerr << "pq serving on " << config.bind_host << ':' << server.port() << (test_mode ? " (test mode)" : "")
              << '\n';
    std::thread waiter([&] {
        int received = 0;
        sigwait(&signals, &received);
        server.stop();
    });
    server.run();
    // Wake the waiter if the server stopped on its own.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pattern-quest engine: question-gated snakes and ladders"};
    app.require_subcommand(1);

    std::string data_dir = "data";
    std::string bind = "127.0.0.1:8080";
    std::string config_dir;
    std::string board = "default30";
    std::string difficulty = "easy";
    bool test_mode = false;
    std::uint64_t seed = 0;

    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--data-dir", data_dir, "directory for player and session documents");
    serve->add_option("--bind", bind, "HOST:PORT to listen on");
    serve->add_option("--config", config_dir, "directory with generator.conf, economy.conf, avatars.conf");
    serve->add_flag("--test-mode", test_mode, "accept X-Seed and X-Now request headers");
    serve->add_option("--board", board, "default30 or a board file");
    serve->add_option("--difficulty", difficulty, "default session difficulty");

    std::string script;
    auto* play = app.add_subcommand("play", "line-mode local game; prints the transcript");
    play->add_option("--seed", seed, "session seed")->required();
    play->add_option("--script", script, "answers file (0..3, correct, wrong per line); stdin when omitted");
    play->add_option("--board", board, "default30 or a board file");
    play->add_option("--difficulty", difficulty, "question difficulty");
    play->add_option("--config", config_dir, "config directory");

    double accuracy = 1.0;
    std::uint64_t games = 1000;
    unsigned threads = 0;
    auto* sim = app.add_subcommand("sim", "balance simulation");
    sim->require_subcommand(1);
    auto* sim_run = sim->add_subcommand("run", "Monte Carlo bot games");
    sim_run->add_option("--accuracy", accuracy, "probability of a correct answer")->check(CLI::Range(0.0, 1.0));
    sim_run->add_option("--games", games, "number of games")->check(CLI::PositiveNumber);
    sim_run->add_option("--seed", seed, "master seed");
    sim_run->add_option("--board", board, "default30 or a board file");
    sim_run->add_option("--difficulty", difficulty, "question difficulty");
    sim_run->add_option("--threads", threads, "worker threads (0 = all cores)");
    sim_run->add_option("--config", config_dir, "config directory");
    auto* sim_oracle = sim->add_subcommand("oracle", "exact expected turns at accuracy 1");
    sim_oracle->add_option("--board", board, "default30 or a board file");

    std::string input;
    std::string instrument;
    std::string format = "text";
    auto* eval = app.add_subcommand("eval", "survey evaluation");
    eval->require_subcommand(1);
    auto* eval_report = eval->add_subcommand("report", "item and driver means with interpretation");
    eval_report->add_option("--input", input, "responses CSV")->required();
    eval_report->add_option("--instrument", instrument, "instrument CSV (bundled 13 items when omitted)");
    eval_report->add_option("--format", format, "text, csv or structured")
        ->check(CLI::IsMember({"text", "csv", "structured"}));

    std::uint64_t count = 1;
    auto* gen = app.add_subcommand("gen", "emit question cards as JSON lines");
    gen->add_option("--seed", seed, "master seed");
    gen->add_option("--count", count, "number of cards");
    gen->add_option("--difficulty", difficulty, "question difficulty");
    gen->add_option("--config", config_dir, "config directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "pq: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*serve) return run_serve(data_dir, bind, config_dir, test_mode, board, difficulty);
        if (*play) return run_play(seed, script, board, difficulty, config_dir);
        if (*sim_run) {
            const EngineConfig config = load_config(config_dir);
            const pq::BoardSpec spec = pq::BoardSpec::resolve(board);
            pq::sim::SimOptions options;
            options.difficulty = difficulty_from(difficulty);
            options.generator = config.generator;
            options.threads = threads;
            const pq::sim::BotPolicy policy{accuracy, seed};
            std::cout << pq::sim::render_report(pq::sim::run_games(policy, spec, config.economy, games, options), policy,
                                                spec);
            return 0;
        }
        if (*sim_oracle) {
            const pq::BoardSpec spec = pq::BoardSpec::resolve(board);
            std::cout << pq::sim::render_oracle(pq::sim::expected_turns_oracle(spec), spec);
            return 0;
        }
        if (*eval_report) {
            const auto inst = instrument.empty() ? pq::eval::Instrument::defaults() : pq::eval::Instrument::load(instrument);
            const auto responses = pq::eval::SurveyResponseSet::load(input, inst);
            const auto report = pq::eval::evaluate(responses, inst, pq::eval::InterpretationScale::standard());
            std::cout << pq::eval::render_report(report, *pq::eval::parse_report_format(format));
            return 0;
        }
        if (*gen) {
            const EngineConfig config = load_config(config_dir);
            const pq::Difficulty level = difficulty_from(difficulty);
            for (std::uint64_t i = 0; i < count; ++i) {
                std::cout << card_line(pq::generate_question(pq::split_seed(seed, i), level, config.generator)) << '\n';
            }
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "pq: " << e.what() << '\n';
        return kExitUsage;
    } catch (const pq::Error& e) {
        std::cerr << "pq: " << pq::to_string(e.code()) << ": " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
