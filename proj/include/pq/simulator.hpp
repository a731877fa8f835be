#pragma once

#include "pq/economy.hpp"
#include "pq/gameplay.hpp"
#include "pq/pattern_bank.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace pq::sim {

__extension__ using Uint128 = unsigned __int128;

struct BotPolicy {
    /// Probability of answering correctly, independently per question.
    double accuracy = 1.0;
    std::uint64_t seed = 0;
};

struct SimOptions {
    Difficulty difficulty = Difficulty::Easy;
    GeneratorConfig generator = GeneratorConfig::defaults();
    /// 0 means std::thread::hardware_concurrency().
    unsigned threads = 0;
};

struct SimReport {
    std::uint64_t games = 0;
    std::uint64_t victories = 0;
    std::uint64_t game_overs = 0;
    std::uint64_t total_turns = 0;
    /// Exact sums; mean and deviation are derived from these.
    Uint128 total_turns_squared = 0;
    std::int64_t total_points = 0;

    double victory_rate = 0.0;
    double lifelines_exhausted_rate = 0.0;
    double mean_turns = 0.0;
    double turns_stddev = 0.0;  // sample standard deviation
    double mean_points = 0.0;

    double turns_standard_error() const;
};

/// Plays n bot games through the gameplay module. Game i is seeded with
/// split_seed(policy.seed, i) for the session and split_seed(that, 0) for the
/// bot's answer draws, so results do not depend on the thread count.
/// Throws Error{InvalidConfig} for n == 0 or accuracy outside [0, 1], and
/// Error{InvalidBoard} for a board on which the finish is unreachable.
SimReport run_games(const BotPolicy& policy, const BoardSpec& board, const EconomyConfig& config, std::uint64_t n,
                    const SimOptions& options = {});

using Rational = boost::multiprecision::cpp_rational;

struct OracleResult {
    /// Expected rolls to finish from the start tile (0).
    Rational expected_turns;
    /// Expected rolls from every tile 0..tile_count-1 reachable from the start.
    std::vector<std::pair<int, Rational>> per_tile;

    double value() const;
    /// Truncated decimal expansion with `digits` fractional digits.
    std::string decimal(unsigned digits = 20) const;
};

/// Exact expected number of rolls to reach the finish when every answer is
/// correct, from the absorbing chain over tiles with a fair die, the board's
/// jumps and overshoot-stays. Built from the board's raw data; does not call
/// apply_move. Throws Error{InvalidBoard} if the board is invalid or the finish
/// is unreachable from some reachable tile.
OracleResult expected_turns_oracle(const BoardSpec& board);

/// Structured (JSON) renderings used by the CLI.
std::string render_report(const SimReport& report, const BotPolicy& policy, const BoardSpec& board);
std::string render_oracle(const OracleResult& oracle, const BoardSpec& board);

}  // namespace pq::sim
