#include "pq/error.hpp"
#include "pq/gameplay.hpp"

#include "test_support.hpp"

#include <array>

using namespace pq;

namespace {

BoardSpec long_board() {
    BoardSpec board;
    board.name = "long";
    board.tile_count = 1000;
    return board;
}

// Session parked in AwaitingAnswer with a hand-made pending turn.
GameSession parked(const BoardSpec& board, int position, int dice, int lifelines) {
    GameSession session = start_session(board, 1, {});
    session.position = position;
    session.lifelines = lifelines;
    session.pending = PendingTurn{dice, generate_question(5, Difficulty::Easy, GeneratorConfig::defaults())};
    session.phase = Phase::AwaitingAnswer;
    return session;
}

int correct_of(const GameSession& s) { return s.pending->card.correct_index; }
int wrong_of(const GameSession& s) { return (s.pending->card.correct_index + 1) % 4; }

}  // namespace

TEST_CASE("apply_move on default30") {
    const auto board = BoardSpec::default30();
    CHECK(apply_move(0, 3, board) == 11);
    CHECK(apply_move(10, 4, board) == 26);  // 14 is the foot of the 14->26 ladder
    CHECK(apply_move(10, 5, board) == 15);
    CHECK(apply_move(10, 4, long_board()) == 14);
    CHECK(apply_move(28, 5, board) == 28);
    CHECK(apply_move(27, 3, board) == 30);
    CHECK(apply_move(8, 4, board) == 2);
    CHECK(apply_move(0, 6, board) == 17);
    CHECK(apply_move(29, 1, board) == 30);
    CHECK(apply_move(29, 2, board) == 29);
}

TEST_CASE("board validation") {
    BoardSpec b;
    b.tile_count = 10;
    CHECK_NOTHROW(b.validate());

    auto with = [](int tiles, std::map<int, int> jumps) {
        BoardSpec x;
        x.tile_count = tiles;
        x.jumps = std::move(jumps);
        return x;
    };
    CHECK_PQ_ERROR(with(0, {}).validate(), ErrorCode::InvalidBoard);
    CHECK_PQ_ERROR(with(10, {{10, 2}}).validate(), ErrorCode::InvalidBoard);
    CHECK_PQ_ERROR(with(10, {{3, 3}}).validate(), ErrorCode::InvalidBoard);
    CHECK_PQ_ERROR(with(10, {{3, 11}}).validate(), ErrorCode::InvalidBoard);
    CHECK_PQ_ERROR(with(10, {{0, 4}}).validate(), ErrorCode::InvalidBoard);
    CHECK_PQ_ERROR(with(10, {{2, 5}, {5, 8}}).validate(), ErrorCode::InvalidBoard);
    CHECK_NOTHROW(with(10, {{2, 5}, {6, 1}}).validate());
    CHECK_NOTHROW(BoardSpec::default30().validate());
}

TEST_CASE("board documents") {
    const auto def = BoardSpec::default30();
    CHECK(BoardSpec::parse(def.to_text()) == def);
    CHECK(BoardSpec::load(test::asset("boards/default30.board")) == def);
    CHECK(BoardSpec::resolve("default30") == def);
    CHECK(BoardSpec::resolve(test::asset("boards/default30.board")) == def);

    const auto small = BoardSpec::parse("board v1\n# tiny\nname tiny\ntiles 5\njump 2 4\n");
    CHECK(small.name == "tiny");
    CHECK(small.tile_count == 5);
    CHECK(small.jumps == std::map<int, int>{{2, 4}});

    CHECK_PQ_ERROR(BoardSpec::parse("board v2\ntiles 5\n"), ErrorCode::InvalidBoard);
    CHECK_PQ_ERROR(BoardSpec::parse("board v1\ntiles five\n"), ErrorCode::InvalidBoard);
    CHECK_PQ_ERROR(BoardSpec::parse("board v1\ntiles 5\njump 5 1\n"), ErrorCode::InvalidBoard);
    CHECK_PQ_ERROR(BoardSpec::parse("board v1\ntiles 5\nwarp 1 2\n"), ErrorCode::InvalidBoard);
    CHECK_PQ_ERROR(BoardSpec::resolve("/nonexistent.board"), ErrorCode::InvalidBoard);
}

TEST_CASE("feedback strings are a bijection") {
    CHECK(feedback_message(FeedbackTag::GoodJob) == "Good job!");
    CHECK(feedback_message(FeedbackTag::Ooppss) == "Ooppss!");
    CHECK(feedback_message(FeedbackTag::Victory) == "Victory");
    CHECK(feedback_message(FeedbackTag::GameOver) == "Game Over");
    for (auto tag : {FeedbackTag::GoodJob, FeedbackTag::Ooppss, FeedbackTag::Victory, FeedbackTag::GameOver}) {
        CHECK(parse_feedback_tag(to_string(tag)) == tag);
    }
    for (auto phase : {Phase::AwaitingRoll, Phase::AwaitingAnswer, Phase::Victory, Phase::GameOver}) {
        CHECK(parse_phase(to_string(phase)) == phase);
    }
}

TEST_CASE("start_session initial state and phase guards") {
    const auto config = GeneratorConfig::defaults();
    auto s = start_session(BoardSpec::default30(), 9, {});
    CHECK(s.position == 0);
    CHECK(s.lifelines == 3);
    CHECK(s.phase == Phase::AwaitingRoll);
    CHECK_FALSE(s.pending.has_value());

    CHECK_PQ_ERROR(answer_question(s, 0), ErrorCode::IllegalPhase);
    roll_dice(s, config);
    CHECK(s.phase == Phase::AwaitingAnswer);
    CHECK_PQ_ERROR(roll_dice(s, config), ErrorCode::IllegalPhase);
    CHECK_PQ_ERROR(answer_question(s, 4), ErrorCode::ChoiceOutOfRange);
    CHECK_PQ_ERROR(answer_question(s, -1), ErrorCode::ChoiceOutOfRange);
    CHECK(s.phase == Phase::AwaitingAnswer);

    BoardSpec broken;
    CHECK_PQ_ERROR(start_session(broken, 1, {}), ErrorCode::InvalidBoard);
    SessionOptions bad;
    bad.lifelines.start = 0;
    CHECK_PQ_ERROR(start_session(BoardSpec::default30(), 1, bad), ErrorCode::InvalidConfig);
}

TEST_CASE("golden first roll for seed 42") {
    auto s = start_session(BoardSpec::default30(), 42, {});
    const auto roll = roll_dice(s, GeneratorConfig::defaults());
    CHECK(roll.dice == 2);
    CHECK(roll.card.seed == 2949826092126892291ULL);
    CHECK(roll.card.id == "E-28efe333b266f103");
    CHECK(roll.card.kind == PatternKind::SquareNumbers);
    CHECK(roll.card.stem == std::array<std::int64_t, 4>{16, 25, 36, 49});
    CHECK(roll.card.choices == std::array<std::int64_t, 4>{64, 90, 49, 38});
    CHECK(roll.card.correct_index == 0);
}

TEST_CASE("dice faces are uniform over 60,000 rolls") {
    const auto config = GeneratorConfig::defaults();
    const auto board = long_board();
    std::array<int, 7> faces{};
    int rolls = 0;
    for (std::uint64_t seed = 0; rolls < 60'000; ++seed) {
        auto s = start_session(board, seed, {});
        while (rolls < 60'000 && !is_terminal(s.phase)) {
            const auto r = roll_dice(s, config);
            ++faces[static_cast<std::size_t>(r.dice)];
            ++rolls;
            answer_question(s, r.card.correct_index);
            if (s.transcript.size() >= 50) break;
        }
    }
    CHECK(faces[0] == 0);
    for (int face = 1; face <= 6; ++face) {
        CHECK(faces[static_cast<std::size_t>(face)] >= 9500);
        CHECK(faces[static_cast<std::size_t>(face)] <= 10500);
    }
}

TEST_CASE("answer_question examples") {
    const auto board = BoardSpec::default30();

    auto a = parked(long_board(), 10, 4, 3);
    CHECK(answer_question(a, correct_of(a)).tag == FeedbackTag::GoodJob);
    CHECK(a.position == 14);
    CHECK(a.phase == Phase::AwaitingRoll);
    CHECK(a.transcript.back().points_delta == 10);

    auto b = parked(board, 10, 4, 1);
    CHECK(answer_question(b, wrong_of(b)).tag == FeedbackTag::GameOver);
    CHECK(b.lifelines == 0);
    CHECK(b.position == 10);
    CHECK(b.phase == Phase::GameOver);

    auto c = parked(board, 10, 4, 3);
    const auto fb = answer_question(c, wrong_of(c));
    CHECK(fb.tag == FeedbackTag::Ooppss);
    CHECK(fb.message() == "Ooppss!");
    CHECK(c.lifelines == 2);
    CHECK(c.position == 10);

    auto d = parked(board, 27, 3, 3);
    CHECK(answer_question(d, correct_of(d)).tag == FeedbackTag::Victory);
    CHECK(d.phase == Phase::Victory);
    CHECK(d.transcript.back().points_delta == 60);
    CHECK_PQ_ERROR(roll_dice(d, GeneratorConfig::defaults()), ErrorCode::IllegalPhase);

    auto e = parked(board, 28, 5, 3);
    CHECK(answer_question(e, correct_of(e)).tag == FeedbackTag::GoodJob);
    CHECK(e.position == 28);
}

TEST_CASE("streak of five correct answers earns a lifeline up to the cap") {
    const auto config = GeneratorConfig::defaults();
    auto s = start_session(long_board(), 3, {});
    for (int i = 0; i < 5; ++i) {
        const auto r = roll_dice(s, config);
        answer_question(s, r.card.correct_index);
    }
    CHECK(s.lifelines == 4);

    for (int i = 0; i < 30; ++i) {
        const auto r = roll_dice(s, config);
        answer_question(s, r.card.correct_index);
    }
    CHECK(s.lifelines == 5);

    // A miss resets the streak.
    auto t = start_session(long_board(), 4, {});
    for (int i = 0; i < 4; ++i) answer_question(t, (roll_dice(t, config), t.pending->card.correct_index));
    answer_question(t, (roll_dice(t, config), wrong_of(t)));
    CHECK(t.lifelines == 2);
    for (int i = 0; i < 4; ++i) answer_question(t, (roll_dice(t, config), t.pending->card.correct_index));
    CHECK(t.lifelines == 2);
    answer_question(t, (roll_dice(t, config), t.pending->card.correct_index));
    CHECK(t.lifelines == 3);
}

TEST_CASE("random action sequences respect the state machine") {
    const auto config = GeneratorConfig::defaults();
    const auto board = BoardSpec::default30();
    SplitMix64 fuzz(77);
    constexpr int kSequences = 1'000'000;
    int illegal = 0;
    for (int seq = 0; seq < kSequences; ++seq) {
        auto s = start_session(board, fuzz.next(), {});
        const int steps = static_cast<int>(fuzz.uniform(1, 12));
        for (int step = 0; step < steps; ++step) {
            const GameSession before = s;
            const auto action = fuzz.uniform(0, 5);
            bool threw = false;
            try {
                if (action <= 1) {
                    roll_dice(s, config);
                } else {
                    answer_question(s, static_cast<int>(fuzz.uniform(-1, 4)));
                }
            } catch (const Error& e) {
                threw = true;
                ++illegal;
                REQUIRE((e.code() == ErrorCode::IllegalPhase || e.code() == ErrorCode::ChoiceOutOfRange));
            }
            if (threw || is_terminal(before.phase)) {
                REQUIRE(s == before);
                continue;
            }
            REQUIRE(s.pending.has_value() == (s.phase == Phase::AwaitingAnswer));
            REQUIRE((s.lifelines == 0) == (s.phase == Phase::GameOver));
            REQUIRE(s.lifelines >= 0);
            REQUIRE(s.lifelines <= s.rules.cap);
            REQUIRE(s.position >= 0);
            REQUIRE(s.position <= board.tile_count);
            if (s.transcript.size() > before.transcript.size()) {
                const auto& turn = s.transcript.back();
                if (!turn.correct) REQUIRE(turn.position_after == turn.position_before);
                REQUIRE(turn.position_after == s.position);
            }
        }
    }
    CHECK(illegal > 0);
}

TEST_CASE("replay reproduces transcripts byte for byte") {
    const auto config = GeneratorConfig::defaults();
    SessionOptions options;
    options.session_id = "s-000001";
    options.player_id = "p-000001";
    const std::vector<int> choices = {0, 1, 2, 3, 0, 0, 1, 2, 3, 3, 2, 1, 0};
    const auto a = replay(BoardSpec::default30(), 1234, options, config, choices);
    const auto b = replay(BoardSpec::default30(), 1234, options, config, choices);
    CHECK(a == b);
    CHECK(render_transcript(a) == render_transcript(b));
    CHECK(render_transcript(a).rfind("session s-000001 player p-000001 board default30 seed 00000000000004d2", 0) == 0);

    const auto c = replay(BoardSpec::default30(), 1235, options, config, choices);
    CHECK(render_transcript(a) != render_transcript(c));
}
