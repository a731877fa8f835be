#include "pq/simulator.hpp"

#include "pq/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

namespace pq::sim {

namespace {

constexpr int kDieFaces = 6;

// Successor tile for the oracle's own transition table.
int oracle_step(int tile, int face, const BoardSpec& board) {
    const int landing = tile + face;
    if (landing > board.tile_count) return tile;
    const auto it = board.jumps.find(landing);
    return it == board.jumps.end() ? landing : it->second;
}

struct Partial {
    std::uint64_t victories = 0;
    std::uint64_t game_overs = 0;
    std::uint64_t total_turns = 0;
    Uint128 total_turns_squared = 0;
    std::int64_t total_points = 0;
};

void play_range(const BotPolicy& policy, const BoardSpec& board, const SessionOptions& session_options,
                const SimOptions& options, std::uint64_t begin, std::uint64_t end, Partial& out) {
    for (std::uint64_t i = begin; i < end; ++i) {
        const std::uint64_t game_seed = split_seed(policy.seed, i);
        SplitMix64 bot(split_seed(game_seed, 0));
        GameSession session = start_session(board, game_seed, session_options);
        while (!is_terminal(session.phase)) {
            const RollResult roll = roll_dice(session, options.generator);
            int choice = roll.card.correct_index;
            if (!bot.bernoulli(policy.accuracy)) {
                const int wrong = static_cast<int>(bot.uniform(0, kChoiceCount - 2));
                choice = wrong < roll.card.correct_index ? wrong : wrong + 1;
            }
            answer_question(session, choice);
        }
        const auto turns = static_cast<std::uint64_t>(session.transcript.size());
        out.total_turns += turns;
        out.total_turns_squared += static_cast<Uint128>(turns) * turns;
        out.total_points += session.total_points();
        if (session.phase == Phase::Victory) ++out.victories;
        else ++out.game_overs;
    }
}

// Tiles reachable from the start, in BFS order.
std::vector<int> reachable_tiles(const BoardSpec& board) {
    std::vector<bool> seen(static_cast<std::size_t>(board.tile_count) + 1, false);
    std::vector<int> order;
    std::deque<int> queue{0};
    seen[0] = true;
    while (!queue.empty()) {
        const int tile = queue.front();
        queue.pop_front();
        order.push_back(tile);
        if (tile == board.tile_count) continue;
        for (int face = 1; face <= kDieFaces; ++face) {
            const int next = oracle_step(tile, face, board);
            if (!seen[static_cast<std::size_t>(next)]) {
                seen[static_cast<std::size_t>(next)] = true;
                queue.push_back(next);
            }
        }
    }
    return order;
}

void require_finish_reachable(const BoardSpec& board) {
    const std::vector<int> tiles = reachable_tiles(board);
    // Reverse reachability from the finish over the reachable subgraph.
    std::map<int, std::vector<int>> predecessors;
    for (const int tile : tiles) {
        if (tile == board.tile_count) continue;
        for (int face = 1; face <= kDieFaces; ++face) predecessors[oracle_step(tile, face, board)].push_back(tile);
    }
    if (std::find(tiles.begin(), tiles.end(), board.tile_count) == tiles.end()) {
        throw Error(ErrorCode::InvalidBoard, "finish tile is unreachable");
    }
    std::map<int, bool> reaches;
    std::deque<int> queue{board.tile_count};
    reaches[board.tile_count] = true;
    while (!queue.empty()) {
        const int tile = queue.front();
        queue.pop_front();
        for (const int pred : predecessors[tile]) {
            if (!reaches[pred]) {
                reaches[pred] = true;
                queue.push_back(pred);
            }
        }
    }
    for (const int tile : tiles) {
        if (!reaches[tile]) {
            throw Error(ErrorCode::InvalidBoard, "finish is unreachable from tile " + std::to_string(tile));
        }
    }
}

}  // namespace

double SimReport::turns_standard_error() const {
    return games == 0 ? 0.0 : turns_stddev / std::sqrt(static_cast<double>(games));
}

SimReport run_games(const BotPolicy& policy, const BoardSpec& board, const EconomyConfig& config, std::uint64_t n,
                    const SimOptions& options) {
    if (n == 0) throw Error(ErrorCode::InvalidConfig, "need at least one game");
    if (!(policy.accuracy >= 0.0 && policy.accuracy <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "accuracy must be within [0, 1]");
    }
    board.validate();
    require_finish_reachable(board);
    options.generator.validate();

    SessionOptions session_options;
    session_options.session_id = "sim";
    session_options.player_id = "bot";
    session_options.difficulty = options.difficulty;
    session_options.scoring = Scoring{config.points_per_correct, config.victory_bonus};
    session_options.lifelines = lifeline_rules(config);

    unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n));

    std::vector<Partial> partials(threads);
    if (threads == 1) {
        play_range(policy, board, session_options, options, 0, n, partials[0]);
    } else {
        std::vector<std::thread> workers;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t begin = n * t / threads;
            const std::uint64_t end = n * (t + 1) / threads;
            workers.emplace_back([&, t, begin, end] {
                try {
                    play_range(policy, board, session_options, options, begin, end, partials[t]);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        if (failure) std::rethrow_exception(failure);
    }

    SimReport report;
    report.games = n;
    for (const Partial& p : partials) {
        report.victories += p.victories;
        report.game_overs += p.game_overs;
        report.total_turns += p.total_turns;
        report.total_turns_squared += p.total_turns_squared;
        report.total_points += p.total_points;
    }
    const auto games = static_cast<double>(n);
    report.victory_rate = static_cast<double>(report.victories) / games;
    report.lifelines_exhausted_rate = static_cast<double>(report.game_overs) / games;
    report.mean_turns = static_cast<double>(report.total_turns) / games;
    report.mean_points = static_cast<double>(report.total_points) / games;
    if (n > 1) {
        // n * sum(x^2) - (sum x)^2 is exact in 128 bits for any realistic run.
        const Uint128 sum = report.total_turns;
        const Uint128 numerator = static_cast<Uint128>(n) * report.total_turns_squared - sum * sum;
        const long double variance = static_cast<long double>(numerator) /
                                     (static_cast<long double>(n) * static_cast<long double>(n - 1));
        report.turns_stddev = static_cast<double>(std::sqrt(variance));
    }
    return report;
}

double OracleResult::value() const { return expected_turns.convert_to<double>(); }

std::string OracleResult::decimal(unsigned digits) const {
    using boost::multiprecision::cpp_int;
    const cpp_int num = boost::multiprecision::numerator(expected_turns);
    const cpp_int den = boost::multiprecision::denominator(expected_turns);
    cpp_int scale = 1;
    for (unsigned i = 0; i < digits; ++i) scale *= 10;
    const cpp_int scaled = num * scale / den;
    std::string text = scaled.str();
    if (digits == 0) return text;
    if (text.size() <= digits) text.insert(0, digits + 1 - text.size(), '0');
    text.insert(text.size() - digits, ".");
    return text;
}

OracleResult expected_turns_oracle(const BoardSpec& board) {
    board.validate();
    require_finish_reachable(board);

    // Unknowns: expected rolls E[t] for every reachable non-finish tile t.
    //   6 E[t] - sum_{faces} E[next(t, face)] = 6,  with E[finish] = 0.
    std::vector<int> tiles = reachable_tiles(board);
    tiles.erase(std::remove(tiles.begin(), tiles.end(), board.tile_count), tiles.end());
    std::sort(tiles.begin(), tiles.end());
    const std::size_t size = tiles.size();
    std::map<int, std::size_t> column;
    for (std::size_t i = 0; i < size; ++i) column[tiles[i]] = i;

    std::vector<std::vector<Rational>> a(size, std::vector<Rational>(size + 1, Rational(0)));
    for (std::size_t row = 0; row < size; ++row) {
        a[row][row] += kDieFaces;
        a[row][size] = kDieFaces;
        for (int face = 1; face <= kDieFaces; ++face) {
            const int next = oracle_step(tiles[row], face, board);
            if (next != board.tile_count) a[row][column.at(next)] -= 1;
        }
    }

    // Gauss-Jordan elimination, exact.
    for (std::size_t col = 0; col < size; ++col) {
        std::size_t pivot = col;
        while (pivot < size && a[pivot][col] == 0) ++pivot;
        if (pivot == size) throw Error(ErrorCode::InvalidBoard, "absorbing chain is singular");
        std::swap(a[col], a[pivot]);
        const Rational lead = a[col][col];
        for (std::size_t k = col; k <= size; ++k) a[col][k] /= lead;
        for (std::size_t row = 0; row < size; ++row) {
            if (row == col || a[row][col] == 0) continue;
            const Rational factor = a[row][col];
            for (std::size_t k = col; k <= size; ++k) a[row][k] -= factor * a[col][k];
        }
    }

    OracleResult result;
    for (std::size_t i = 0; i < size; ++i) result.per_tile.emplace_back(tiles[i], a[i][size]);
    result.expected_turns = a[column.at(0)][size];
    return result;
}

std::string render_report(const SimReport& r, const BotPolicy& policy, const BoardSpec& board) {
    nlohmann::ordered_json doc{{"report", "simulation"},
                               {"board", board.name},
                               {"accuracy", policy.accuracy},
                               {"seed", std::to_string(policy.seed)},
                               {"games", r.games},
                               {"victories", r.victories},
                               {"game_overs", r.game_overs},
                               {"victory_rate", r.victory_rate},
                               {"lifelines_exhausted_rate", r.lifelines_exhausted_rate},
                               {"mean_turns", r.mean_turns},
                               {"turns_stddev", r.turns_stddev},
                               {"turns_standard_error", r.turns_standard_error()},
                               {"mean_points", r.mean_points}};
    return doc.dump(2) + "\n";
}

std::string render_oracle(const OracleResult& oracle, const BoardSpec& board) {
    nlohmann::ordered_json tiles = nlohmann::ordered_json::array();
    for (const auto& [tile, value] : oracle.per_tile) {
        tiles.push_back({{"tile", tile}, {"expected_turns", value.str()}});
    }
    nlohmann::ordered_json doc{{"report", "oracle"},
                               {"board", board.name},
                               {"expected_turns", oracle.expected_turns.str()},
                               {"expected_turns_decimal", oracle.decimal(20)},
                               {"per_tile", std::move(tiles)}};
    return doc.dump(2) + "\n";
}

}  // namespace pq::sim
