#include "pq/gameplay.hpp"

#include "pq/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace pq {

namespace {

[[noreturn]] void invalid_board(const std::string& message) {
    throw Error(ErrorCode::InvalidBoard, message);
}

[[noreturn]] void illegal_phase(Phase phase, std::string_view action) {
    throw Error(ErrorCode::IllegalPhase,
                "cannot " + std::string(action) + " in phase " + std::string(to_string(phase)));
}

}  // namespace

void BoardSpec::validate() const {
    if (tile_count < 1) invalid_board("tile_count must be positive");
    std::set<int> targets;
    for (const auto& [from, to] : jumps) targets.insert(to);
    for (const auto& [from, to] : jumps) {
        const std::string jump = std::to_string(from) + "->" + std::to_string(to);
        if (from < 1 || from > tile_count || to < 1 || to > tile_count) invalid_board("jump " + jump + " leaves the board");
        if (from == tile_count) invalid_board("jump " + jump + " starts on the finish tile");
        if (from == to) invalid_board("jump " + jump + " maps a tile to itself");
        if (targets.count(from) != 0) invalid_board("jump " + jump + " starts on another jump's target");
    }
}

BoardSpec BoardSpec::default30() {
    BoardSpec board;
    board.name = "default30";
    board.tile_count = 30;
    board.jumps = {{3, 11}, {6, 17}, {14, 26}, {12, 2}, {19, 8}, {27, 13}};
    return board;
}

BoardSpec BoardSpec::parse(std::string_view text) {
    BoardSpec board;
    bool saw_header = false;
    bool saw_tiles = false;
    std::size_t line_no = 0;
    for (const auto& raw : detail::split_lines(text)) {
        ++line_no;
        const std::string_view line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        std::istringstream in{std::string(line)};
        std::string keyword;
        in >> keyword;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (!saw_header) {
            std::string version;
            if (keyword != "board" || !(in >> version) || version != "v1") invalid_board(where + "expected `board v1`");
            saw_header = true;
        } else if (keyword == "name") {
            if (!(in >> board.name)) invalid_board(where + "missing name");
        } else if (keyword == "tiles") {
            if (!(in >> board.tile_count)) invalid_board(where + "bad tile count");
            saw_tiles = true;
        } else if (keyword == "jump") {
            int from = 0;
            int to = 0;
            if (!(in >> from >> to)) invalid_board(where + "expected `jump <from> <to>`");
            if (!board.jumps.emplace(from, to).second) invalid_board(where + "duplicate jump source");
        } else {
            invalid_board(where + "unknown keyword " + keyword);
        }
        std::string extra;
        if (in >> extra) invalid_board(where + "trailing text");
    }
    if (!saw_header) invalid_board("empty board document");
    if (!saw_tiles) invalid_board("missing `tiles` line");
    board.validate();
    return board;
}

BoardSpec BoardSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) invalid_board("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

BoardSpec BoardSpec::resolve(const std::string& name_or_path) {
    if (name_or_path == "default30") return default30();
    return load(name_or_path);
}

std::string BoardSpec::to_text() const {
    std::ostringstream out;
    out << "board v1\n" << "name " << name << '\n' << "tiles " << tile_count << '\n';
    for (const auto& [from, to] : jumps) out << "jump " << from << ' ' << to << '\n';
    return out.str();
}

int apply_move(int position, int dice, const BoardSpec& board) {
    const int tentative = position + dice;
    if (tentative > board.finish_tile()) return position;
    const auto jump = board.jumps.find(tentative);
    return jump == board.jumps.end() ? tentative : jump->second;
}

std::string_view to_string(Phase phase) noexcept {
    switch (phase) {
        case Phase::AwaitingRoll: return "AwaitingRoll";
        case Phase::AwaitingAnswer: return "AwaitingAnswer";
        case Phase::Victory: return "Victory";
        case Phase::GameOver: return "GameOver";
    }
    return "AwaitingRoll";
}

std::optional<Phase> parse_phase(std::string_view text) noexcept {
    for (const Phase p : {Phase::AwaitingRoll, Phase::AwaitingAnswer, Phase::Victory, Phase::GameOver}) {
        if (to_string(p) == text) return p;
    }
    return std::nullopt;
}

std::string_view to_string(FeedbackTag tag) noexcept {
    switch (tag) {
        case FeedbackTag::GoodJob: return "GoodJob";
        case FeedbackTag::Ooppss: return "Ooppss";
        case FeedbackTag::Victory: return "Victory";
        case FeedbackTag::GameOver: return "GameOver";
    }
    return "GoodJob";
}

std::optional<FeedbackTag> parse_feedback_tag(std::string_view text) noexcept {
    for (const FeedbackTag t : {FeedbackTag::GoodJob, FeedbackTag::Ooppss, FeedbackTag::Victory, FeedbackTag::GameOver}) {
        if (to_string(t) == text) return t;
    }
    return std::nullopt;
}

std::string_view feedback_message(FeedbackTag tag) noexcept {
    switch (tag) {
        case FeedbackTag::GoodJob: return "Good job!";
        case FeedbackTag::Ooppss: return "Ooppss!";
        case FeedbackTag::Victory: return "Victory";
        case FeedbackTag::GameOver: return "Game Over";
    }
    return "Good job!";
}

std::int64_t GameSession::total_points() const noexcept {
    std::int64_t total = 0;
    for (const auto& turn : transcript) total += turn.points_delta;
    return total;
}

GameSession start_session(const BoardSpec& board, std::uint64_t seed, const SessionOptions& options) {
    board.validate();
    const LifelineRules& rules = options.lifelines;
    if (rules.start < 1 || rules.cap < rules.start || rules.streak_for_bonus < 1) {
        throw Error(ErrorCode::InvalidConfig, "lifeline rules need 1 <= start <= cap and a positive streak");
    }
    GameSession session;
    session.session_id = options.session_id;
    session.player_id = options.player_id;
    session.board = board;
    session.difficulty = options.difficulty;
    session.scoring = options.scoring;
    session.rules = rules;
    session.seed = seed;
    session.lifelines = rules.start;
    session.rng = SplitMix64(seed);
    return session;
}

RollResult roll_dice(GameSession& session, const GeneratorConfig& config) {
    if (session.phase != Phase::AwaitingRoll) illegal_phase(session.phase, "roll");
    const int dice = static_cast<int>(session.rng.uniform(1, 6));
    const std::uint64_t card_seed = session.rng.next();
    PendingTurn pending{dice, generate_question(card_seed, session.difficulty, config)};
    session.pending = pending;
    session.phase = Phase::AwaitingAnswer;
    return RollResult{pending.dice, std::move(pending.card)};
}

Feedback answer_question(GameSession& session, int choice_index) {
    if (session.phase != Phase::AwaitingAnswer || !session.pending) illegal_phase(session.phase, "answer");
    if (choice_index < 0 || choice_index >= static_cast<int>(kChoiceCount)) {
        throw Error(ErrorCode::ChoiceOutOfRange, "choice index must be in 0..3");
    }
    const PendingTurn& pending = *session.pending;

    TurnRecord record;
    record.dice = pending.dice;
    record.card_id = pending.card.id;
    record.answer_index = choice_index;
    record.correct = choice_index == pending.card.correct_index;
    record.position_before = session.position;

    if (record.correct) {
        session.position = apply_move(session.position, pending.dice, session.board);
        ++session.consecutive_correct;
        if (session.consecutive_correct % session.rules.streak_for_bonus == 0) {
            session.lifelines = std::min(session.lifelines + 1, session.rules.cap);
        }
        record.points_delta = session.scoring.per_correct;
        if (session.position == session.board.finish_tile()) {
            session.phase = Phase::Victory;
            record.feedback.tag = FeedbackTag::Victory;
            record.points_delta += session.scoring.victory_bonus;
        } else {
            session.phase = Phase::AwaitingRoll;
            record.feedback.tag = FeedbackTag::GoodJob;
        }
    } else {
        --session.lifelines;
        session.consecutive_correct = 0;
        if (session.lifelines == 0) {
            session.phase = Phase::GameOver;
            record.feedback.tag = FeedbackTag::GameOver;
        } else {
            session.phase = Phase::AwaitingRoll;
            record.feedback.tag = FeedbackTag::Ooppss;
        }
    }
    record.position_after = session.position;
    session.pending.reset();
    session.transcript.push_back(record);
    return record.feedback;
}

std::string render_transcript(const GameSession& session) {
    std::ostringstream out;
    char seed_hex[24];
    std::snprintf(seed_hex, sizeof seed_hex, "%016llx", static_cast<unsigned long long>(session.seed));
    out << "session " << session.session_id << " player " << session.player_id << " board " << session.board.name
        << " seed " << seed_hex << " difficulty " << to_string(session.difficulty) << '\n';
    int turn = 0;
    for (const auto& r : session.transcript) {
        out << "turn " << ++turn << " dice " << r.dice << " card " << r.card_id << " answer " << r.answer_index
            << " correct " << (r.correct ? "yes" : "no") << " from " << r.position_before << " to " << r.position_after
            << " feedback \"" << r.feedback.message() << "\" points " << r.points_delta << '\n';
    }
    out << "status " << to_string(session.phase) << " position " << session.position << " lifelines "
        << session.lifelines << " points " << session.total_points() << '\n';
    return out.str();
}

GameSession replay(const BoardSpec& board, std::uint64_t seed, const SessionOptions& options,
                   const GeneratorConfig& config, const std::vector<int>& choices) {
    GameSession session = start_session(board, seed, options);
    for (const int choice : choices) {
        if (is_terminal(session.phase)) break;
        roll_dice(session, config);
        answer_question(session, choice);
    }
    return session;
}

}  // namespace pq
