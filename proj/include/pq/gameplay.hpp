#pragma once

#include "pq/pattern_bank.hpp"
#include "pq/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pq {

/// Board topology. Tiles are 1..tile_count; 0 is the off-board start and
/// tile_count the finish. A jump whose target is lower than its source is a
/// snake, higher a ladder.
struct BoardSpec {
    std::string name = "custom";
    int tile_count = 0;
    std::map<int, int> jumps;

    int finish_tile() const noexcept { return tile_count; }

    /// Throws Error{InvalidBoard}: tile_count >= 1, jump ends in 1..tile_count,
    /// no jump on the finish tile, no self-jump, no source that is also a target.
    void validate() const;

    /// 30 tiles; ladders 3->11, 6->17, 14->26; snakes 12->2, 19->8, 27->13.
    static BoardSpec default30();

    /// Plain-text board document:
    ///   board v1
    ///   name <name>
    ///   tiles <tile_count>
    ///   jump <from> <to>        (any number of lines, ascending `from`)
    /// `#` starts a comment. The result is validated.
    static BoardSpec parse(std::string_view text);
    static BoardSpec load(const std::string& path);

    /// "default30" or a path to a board document.
    static BoardSpec resolve(const std::string& name_or_path);

    std::string to_text() const;

    friend bool operator==(const BoardSpec&, const BoardSpec&) = default;
};

/// Token position after rolling `dice` from `position`: overshooting the
/// finish leaves the token in place, otherwise at most one jump applies.
int apply_move(int position, int dice, const BoardSpec& board);

enum class Phase { AwaitingRoll, AwaitingAnswer, Victory, GameOver };

std::string_view to_string(Phase phase) noexcept;
std::optional<Phase> parse_phase(std::string_view text) noexcept;

inline bool is_terminal(Phase phase) noexcept {
    return phase == Phase::Victory || phase == Phase::GameOver;
}

enum class FeedbackTag { GoodJob, Ooppss, Victory, GameOver };

std::string_view to_string(FeedbackTag tag) noexcept;
std::optional<FeedbackTag> parse_feedback_tag(std::string_view text) noexcept;

/// The text shown to the player: "Good job!", "Ooppss!", "Victory", "Game Over".
std::string_view feedback_message(FeedbackTag tag) noexcept;

struct Feedback {
    FeedbackTag tag = FeedbackTag::GoodJob;

    std::string_view message() const noexcept { return feedback_message(tag); }

    friend bool operator==(const Feedback&, const Feedback&) = default;
};

struct TurnRecord {
    int dice = 1;
    std::string card_id;
    int answer_index = 0;
    bool correct = false;
    int position_before = 0;
    int position_after = 0;
    Feedback feedback;
    std::int64_t points_delta = 0;

    friend bool operator==(const TurnRecord&, const TurnRecord&) = default;
};

/// Points credited per turn. Snapshotted when the session starts so the
/// transcript is self-contained.
struct Scoring {
    std::int64_t per_correct = 10;
    std::int64_t victory_bonus = 50;

    friend bool operator==(const Scoring&, const Scoring&) = default;
};

struct LifelineRules {
    int start = 3;
    int cap = 5;
    int streak_for_bonus = 5;

    friend bool operator==(const LifelineRules&, const LifelineRules&) = default;
};

struct SessionOptions {
    std::string session_id;
    std::string player_id;
    Difficulty difficulty = Difficulty::Easy;
    Scoring scoring;
    LifelineRules lifelines;
};

struct PendingTurn {
    int dice = 1;
    QuestionCard card;

    friend bool operator==(const PendingTurn&, const PendingTurn&) = default;
};

/// Live game state. Invariants: `pending` is set iff phase == AwaitingAnswer;
/// lifelines == 0 iff phase == GameOver; terminal sessions never change.
struct GameSession {
    std::string session_id;
    std::string player_id;
    BoardSpec board;
    Difficulty difficulty = Difficulty::Easy;
    Scoring scoring;
    LifelineRules rules;
    std::uint64_t seed = 0;
    int position = 0;
    int lifelines = 0;
    Phase phase = Phase::AwaitingRoll;
    std::optional<PendingTurn> pending;
    int consecutive_correct = 0;
    SplitMix64 rng;
    std::vector<TurnRecord> transcript;

    std::int64_t total_points() const noexcept;

    friend bool operator==(const GameSession&, const GameSession&) = default;
};

/// Fresh session at position 0 in AwaitingRoll. Energy is the caller's
/// business (economy::consume_energy). Throws Error{InvalidBoard}.
GameSession start_session(const BoardSpec& board, std::uint64_t seed, const SessionOptions& options);

struct RollResult {
    int dice = 1;
    QuestionCard card;
};

/// Draws the die (uniform 1..6) then a card seed from the session generator.
/// Throws Error{IllegalPhase} unless phase == AwaitingRoll.
RollResult roll_dice(GameSession& session, const GeneratorConfig& config);

/// Resolves the pending question and appends a TurnRecord.
/// Throws Error{IllegalPhase} unless phase == AwaitingAnswer, and
/// Error{ChoiceOutOfRange} for an index outside 0..3.
Feedback answer_question(GameSession& session, int choice_index);

/// One line per turn plus a header and a closing status line. Byte-stable.
std::string render_transcript(const GameSession& session);

/// Re-executes (roll, answer choice) pairs against a fresh session, stopping
/// early if the game ends.
GameSession replay(const BoardSpec& board, std::uint64_t seed, const SessionOptions& options,
                   const GeneratorConfig& config, const std::vector<int>& choices);

}  // namespace pq
