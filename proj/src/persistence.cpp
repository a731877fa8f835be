#include "pq/persistence.hpp"

#include "pq/error.hpp"
#include "text_util.hpp"

#include <zlib.h>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pq {

using nlohmann::json;

namespace {

constexpr std::string_view kFooterPrefix = "#crc32 ";
constexpr std::array<std::string_view, 11> kProfileKeys = {
    "schema_version", "player_id", "name",     "settings",   "wallet",     "quests",
    "stats",          "sessions",  "created_at", "updated_at", "document",
};

[[noreturn]] void corrupt(const std::string& message) {
    throw Error(ErrorCode::LoadCorrupt, message);
}

std::uint32_t crc32_of(std::string_view bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

std::string u64_text(std::uint64_t value) { return std::to_string(value); }

std::uint64_t u64_from(const json& j) {
    const std::string text = j.get<std::string>();
    if (text.empty() || text.size() > 20 || !std::all_of(text.begin(), text.end(), ::isdigit)) {
        corrupt("bad 64-bit value " + text);
    }
    errno = 0;
    const unsigned long long value = std::strtoull(text.c_str(), nullptr, 10);
    if (errno == ERANGE) corrupt("64-bit value out of range " + text);
    return value;
}

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        if (c < 0x80) len = 1;
        else if ((c & 0xE0) == 0xC0 && c >= 0xC2) len = 2;
        else if ((c & 0xF0) == 0xE0) len = 3;
        else if ((c & 0xF8) == 0xF0 && c <= 0xF4) len = 4;
        else return false;
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        i += len;
    }
    return true;
}

bool safe_id(const std::string& id) {
    return !id.empty() && id.size() <= 64 &&
           std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-'; });
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "no such document " + path.filename().string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string format_id(char prefix, std::int64_t n) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%c-%06lld", prefix, static_cast<long long>(n));
    return buffer;
}

template <typename Enum, typename Parse>
Enum parse_enum(const json& j, Parse parse, std::string_view what) {
    const auto value = parse(j.get<std::string>());
    if (!value) corrupt("bad " + std::string(what) + " " + j.get<std::string>());
    return *value;
}

}  // namespace

void validate_settings(const PlayerSettings& settings) {
    if (settings.volume < 0 || settings.volume > 100) {
        throw Error(ErrorCode::InvalidSettings, "volume must be within 0..100");
    }
}

std::string normalize_name(std::string_view raw) {
    const std::string_view name = detail::trim(raw);
    if (name.empty()) throw Error(ErrorCode::InvalidName, "name must not be empty");
    if (!valid_utf8(name)) throw Error(ErrorCode::InvalidName, "name must be valid UTF-8");
    std::size_t code_points = 0;
    for (const char ch : name) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x20 || c == 0x7F) throw Error(ErrorCode::InvalidName, "name contains control characters");
        if ((c & 0xC0) != 0x80) ++code_points;
    }
    if (code_points > kMaxNameLength) throw Error(ErrorCode::InvalidName, "name longer than 32 characters");
    return std::string(name);
}

std::string name_key(std::string_view normalized_name) { return detail::to_lower(normalized_name); }

json to_json(const Wallet& wallet) {
    return json{{"points", wallet.points},
                {"energy", wallet.energy},
                {"energy_last_refill", wallet.energy_last_refill},
                {"owned_avatars", wallet.owned_avatars},
                {"active_avatar", wallet.active_avatar}};
}

Wallet wallet_from_json(const json& j) {
    Wallet wallet;
    wallet.points = j.at("points").get<std::int64_t>();
    wallet.energy = j.at("energy").get<int>();
    wallet.energy_last_refill = j.at("energy_last_refill").get<Timestamp>();
    wallet.owned_avatars = j.at("owned_avatars").get<std::set<std::string>>();
    wallet.active_avatar = j.at("active_avatar").get<std::string>();
    return wallet;
}

json to_json(const QuestState& quests) {
    return json{{"day", format_day(quests.day_key)},
                {"correct_answers", quests.correct_answers},
                {"finished_game", quests.finished_game},
                {"claimed", quests.claimed}};
}

QuestState quests_from_json(const json& j) {
    QuestState quests;
    const auto day = parse_day(j.at("day").get<std::string>());
    if (!day) corrupt("bad quest day");
    quests.day_key = *day;
    quests.correct_answers = j.at("correct_answers").get<int>();
    quests.finished_game = j.at("finished_game").get<bool>();
    quests.claimed = j.at("claimed").get<std::set<std::string>>();
    return quests;
}

json to_json(const QuestionCard& card) {
    return json{{"id", card.id},
                {"kind", to_string(card.kind)},
                {"stem", card.stem},
                {"choices", card.choices},
                {"correct_index", card.correct_index},
                {"difficulty", to_string(card.difficulty)},
                {"seed", u64_text(card.seed)}};
}

QuestionCard card_from_json(const json& j) {
    QuestionCard card;
    card.id = j.at("id").get<std::string>();
    card.kind = parse_enum<PatternKind>(j.at("kind"), parse_pattern_kind, "pattern kind");
    card.stem = j.at("stem").get<std::array<std::int64_t, kStemLength>>();
    card.choices = j.at("choices").get<std::array<std::int64_t, kChoiceCount>>();
    card.correct_index = j.at("correct_index").get<int>();
    if (card.correct_index < 0 || card.correct_index >= static_cast<int>(kChoiceCount)) corrupt("bad correct_index");
    card.difficulty = parse_enum<Difficulty>(j.at("difficulty"), parse_difficulty, "difficulty");
    card.seed = u64_from(j.at("seed"));
    return card;
}

json to_json(const BoardSpec& board) {
    json jumps = json::array();
    for (const auto& [from, to] : board.jumps) jumps.push_back({from, to});
    return json{{"name", board.name}, {"tile_count", board.tile_count}, {"jumps", std::move(jumps)}};
}

BoardSpec board_from_json(const json& j) {
    BoardSpec board;
    board.name = j.at("name").get<std::string>();
    board.tile_count = j.at("tile_count").get<int>();
    for (const auto& jump : j.at("jumps")) {
        board.jumps.emplace(jump.at(0).get<int>(), jump.at(1).get<int>());
    }
    board.validate();
    return board;
}

json to_json(const TurnRecord& r) {
    return json{{"dice", r.dice},
                {"card_id", r.card_id},
                {"answer_index", r.answer_index},
                {"correct", r.correct},
                {"position_before", r.position_before},
                {"position_after", r.position_after},
                {"feedback", to_string(r.feedback.tag)},
                {"message", r.feedback.message()},
                {"points_delta", r.points_delta}};
}

TurnRecord turn_from_json(const json& j) {
    TurnRecord r;
    r.dice = j.at("dice").get<int>();
    r.card_id = j.at("card_id").get<std::string>();
    r.answer_index = j.at("answer_index").get<int>();
    r.correct = j.at("correct").get<bool>();
    r.position_before = j.at("position_before").get<int>();
    r.position_after = j.at("position_after").get<int>();
    r.feedback.tag = parse_enum<FeedbackTag>(j.at("feedback"), parse_feedback_tag, "feedback");
    r.points_delta = j.at("points_delta").get<std::int64_t>();
    return r;
}

json to_json(const PlayerProfile& p) {
    json j = p.extra.is_object() ? p.extra : json::object();
    j["document"] = "player";
    j["schema_version"] = p.schema_version;
    j["player_id"] = p.player_id;
    j["name"] = p.name;
    j["settings"] = json{{"music_on", p.settings.music_on}, {"volume", p.settings.volume}};
    j["wallet"] = to_json(p.wallet);
    j["quests"] = to_json(p.quests);
    j["stats"] = json{{"games_played", p.stats.games_played},
                      {"victories", p.stats.victories},
                      {"questions_answered", p.stats.questions_answered},
                      {"correct_answers", p.stats.correct_answers}};
    j["sessions"] = p.sessions;
    j["created_at"] = p.created_at;
    j["updated_at"] = p.updated_at;
    return j;
}

PlayerProfile profile_from_json(const json& j) {
    PlayerProfile p;
    try {
        if (j.at("document").get<std::string>() != "player") corrupt("not a player document");
        p.schema_version = j.at("schema_version").get<int>();
        p.player_id = j.at("player_id").get<std::string>();
        p.name = j.at("name").get<std::string>();
        const json& settings = j.at("settings");
        p.settings.music_on = settings.at("music_on").get<bool>();
        p.settings.volume = settings.at("volume").get<int>();
        p.wallet = wallet_from_json(j.at("wallet"));
        p.quests = quests_from_json(j.at("quests"));
        const json& stats = j.at("stats");
        p.stats.games_played = stats.at("games_played").get<std::int64_t>();
        p.stats.victories = stats.at("victories").get<std::int64_t>();
        p.stats.questions_answered = stats.at("questions_answered").get<std::int64_t>();
        p.stats.correct_answers = stats.at("correct_answers").get<std::int64_t>();
        p.sessions = j.at("sessions").get<std::vector<std::string>>();
        p.created_at = j.at("created_at").get<Timestamp>();
        p.updated_at = j.at("updated_at").get<Timestamp>();
    } catch (const json::exception& e) {
        corrupt(std::string("player document: ") + e.what());
    }
    p.extra = json::object();
    for (const auto& [key, value] : j.items()) {
        if (std::find(kProfileKeys.begin(), kProfileKeys.end(), key) == kProfileKeys.end()) p.extra[key] = value;
    }
    return p;
}

json to_json(const GameSession& s) {
    json j{{"document", "session"},
           {"schema_version", kSessionSchemaVersion},
           {"session_id", s.session_id},
           {"player_id", s.player_id},
           {"board", to_json(s.board)},
           {"difficulty", to_string(s.difficulty)},
           {"scoring", {{"per_correct", s.scoring.per_correct}, {"victory_bonus", s.scoring.victory_bonus}}},
           {"lifeline_rules",
            {{"start", s.rules.start}, {"cap", s.rules.cap}, {"streak_for_bonus", s.rules.streak_for_bonus}}},
           {"seed", u64_text(s.seed)},
           {"rng_state", u64_text(s.rng.state())},
           {"position", s.position},
           {"lifelines", s.lifelines},
           {"phase", to_string(s.phase)},
           {"consecutive_correct", s.consecutive_correct}};
    j["pending"] = s.pending ? json{{"dice", s.pending->dice}, {"card", to_json(s.pending->card)}} : json(nullptr);
    json transcript = json::array();
    for (const auto& r : s.transcript) transcript.push_back(to_json(r));
    j["transcript"] = std::move(transcript);
    return j;
}

GameSession session_from_json(const json& j) {
    GameSession s;
    try {
        if (j.at("document").get<std::string>() != "session") corrupt("not a session document");
        const int version = j.at("schema_version").get<int>();
        if (version > kSessionSchemaVersion) {
            throw Error(ErrorCode::UnsupportedVersion, "session schema " + std::to_string(version) + " is newer than " +
                                                           std::to_string(kSessionSchemaVersion));
        }
        s.session_id = j.at("session_id").get<std::string>();
        s.player_id = j.at("player_id").get<std::string>();
        s.board = board_from_json(j.at("board"));
        s.difficulty = parse_enum<Difficulty>(j.at("difficulty"), parse_difficulty, "difficulty");
        s.scoring.per_correct = j.at("scoring").at("per_correct").get<std::int64_t>();
        s.scoring.victory_bonus = j.at("scoring").at("victory_bonus").get<std::int64_t>();
        s.rules.start = j.at("lifeline_rules").at("start").get<int>();
        s.rules.cap = j.at("lifeline_rules").at("cap").get<int>();
        s.rules.streak_for_bonus = j.at("lifeline_rules").at("streak_for_bonus").get<int>();
        s.seed = u64_from(j.at("seed"));
        s.rng = SplitMix64(u64_from(j.at("rng_state")));
        s.position = j.at("position").get<int>();
        s.lifelines = j.at("lifelines").get<int>();
        s.phase = parse_enum<Phase>(j.at("phase"), parse_phase, "phase");
        s.consecutive_correct = j.at("consecutive_correct").get<int>();
        const json& pending = j.at("pending");
        if (!pending.is_null()) s.pending = PendingTurn{pending.at("dice").get<int>(), card_from_json(pending.at("card"))};
        for (const auto& r : j.at("transcript")) s.transcript.push_back(turn_from_json(r));
    } catch (const json::exception& e) {
        corrupt(std::string("session document: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidBoard) corrupt(std::string("session document: ") + e.what());
        throw;
    }
    if (s.pending.has_value() != (s.phase == Phase::AwaitingAnswer)) corrupt("session pending/phase mismatch");
    return s;
}

std::string seal_document(const json& body) {
    std::string text = body.dump(2);
    text += '\n';
    char footer[32];
    std::snprintf(footer, sizeof footer, "%08x\n", crc32_of(text));
    text += kFooterPrefix;
    text += footer;
    return text;
}

json open_document(std::string_view text) {
    // Footer is the last line: "#crc32 " + 8 hex digits + "\n".
    constexpr std::size_t kFooterSize = 7 + 8 + 1;
    if (text.size() < kFooterSize || text.back() != '\n') corrupt("document truncated");
    const std::string_view body = text.substr(0, text.size() - kFooterSize);
    const std::string_view footer = text.substr(text.size() - kFooterSize);
    if (footer.substr(0, kFooterPrefix.size()) != kFooterPrefix) corrupt("checksum footer missing");
    const std::string hex(footer.substr(kFooterPrefix.size(), 8));
    if (!std::all_of(hex.begin(), hex.end(), ::isxdigit)) corrupt("checksum footer malformed");
    const auto expected = static_cast<std::uint32_t>(std::stoul(hex, nullptr, 16));
    if (crc32_of(body) != expected) corrupt("checksum mismatch");
    try {
        json parsed = json::parse(body);
        if (!parsed.is_object()) corrupt("document body is not an object");
        return parsed;
    } catch (const json::parse_error& e) {
        corrupt(std::string("document body: ") + e.what());
    }
}

json migrate(json body, Timestamp now) {
    if (!body.is_object() || !body.contains("schema_version") || !body["schema_version"].is_number_integer()) {
        corrupt("schema_version missing");
    }
    const int version = body["schema_version"].get<int>();
    if (version > kProfileSchemaVersion) {
        throw Error(ErrorCode::UnsupportedVersion, "profile schema " + std::to_string(version) + " is newer than " +
                                                       std::to_string(kProfileSchemaVersion));
    }
    if (version < 1) corrupt("schema_version must be >= 1");
    if (version < 2) {
        if (!body.contains("quests")) body["quests"] = to_json(fresh_quests(now));
        if (!body.contains("sessions")) body["sessions"] = json::array();
        if (!body.contains("document")) body["document"] = "player";
        body["schema_version"] = 2;
    }
    return body;
}

std::string encode_profile(const PlayerProfile& profile) { return seal_document(to_json(profile)); }

PlayerProfile decode_profile(std::string_view document, Timestamp now) {
    return profile_from_json(migrate(open_document(document), now));
}

void atomic_write(const std::filesystem::path& path, std::string_view contents) {
    static std::atomic<std::uint64_t> counter{0};
    const std::filesystem::path tmp =
        path.string() + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
    auto fail = [&](const std::string& what) {
        ::unlink(tmp.c_str());
        throw Error(ErrorCode::DataDirUnwritable, what + " " + path.string() + ": " + std::strerror(errno));
    };
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) fail("cannot create temp file for");
    std::size_t written = 0;
    while (written < contents.size()) {
        const ssize_t n = ::write(fd, contents.data() + written, contents.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            fail("cannot write");
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        fail("cannot fsync");
    }
    ::close(fd);
    if (::rename(tmp.c_str(), path.c_str()) != 0) fail("cannot rename into");
    const int dir = ::open(path.parent_path().c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (dir >= 0) {
        ::fsync(dir);
        ::close(dir);
    }
}

ProfileStore::ProfileStore(std::filesystem::path data_dir, EconomyConfig economy, AvatarCatalog catalog)
    : data_dir_(std::move(data_dir)), economy_(std::move(economy)), catalog_(std::move(catalog)) {
    std::error_code ec;
    std::filesystem::create_directories(data_dir_ / "players", ec);
    if (!ec) std::filesystem::create_directories(data_dir_ / "sessions", ec);
    if (ec) throw Error(ErrorCode::DataDirUnwritable, "cannot create " + data_dir_.string() + ": " + ec.message());
    if (::access(data_dir_.c_str(), W_OK) != 0) {
        throw Error(ErrorCode::DataDirUnwritable, data_dir_.string() + " is not writable");
    }

    const auto index_path = data_dir_ / "index.json";
    if (std::filesystem::exists(index_path)) {
        const json j = open_document(read_file(index_path));
        try {
            index_.next_player = j.at("next_player").get<std::int64_t>();
            index_.next_session = j.at("next_session").get<std::int64_t>();
            index_.names = j.at("names").get<std::map<std::string, std::string>>();
        } catch (const json::exception& e) {
            corrupt(std::string("index: ") + e.what());
        }
    } else {
        write_index();
    }
}

std::filesystem::path ProfileStore::player_path(const std::string& id) const {
    if (!safe_id(id)) throw Error(ErrorCode::NotFound, "no player " + id);
    return data_dir_ / "players" / (id + ".json");
}

std::filesystem::path ProfileStore::session_path(const std::string& id) const {
    if (!safe_id(id)) throw Error(ErrorCode::NotFound, "no session " + id);
    return data_dir_ / "sessions" / (id + ".json");
}

void ProfileStore::write_index() const {
    const json j{{"document", "index"},
                 {"schema_version", 1},
                 {"next_player", index_.next_player},
                 {"next_session", index_.next_session},
                 {"names", index_.names}};
    atomic_write(data_dir_ / "index.json", seal_document(j));
}

PlayerProfile ProfileStore::register_player(std::string_view raw_name, Timestamp now) {
    const std::string name = normalize_name(raw_name);
    const std::string key = name_key(name);

    std::lock_guard lock(index_mutex_);
    if (index_.names.count(key) != 0) throw Error(ErrorCode::DuplicateName, "name " + name + " is taken");

    PlayerProfile profile;
    profile.player_id = format_id('p', index_.next_player);
    profile.name = name;
    profile.wallet = new_wallet(now, economy_, catalog_);
    profile.quests = fresh_quests(now);
    profile.created_at = now;
    profile.updated_at = now;

    atomic_write(player_path(profile.player_id), encode_profile(profile));
    Index next = index_;
    next.names.emplace(key, profile.player_id);
    ++next.next_player;
    std::swap(index_, next);
    try {
        write_index();
    } catch (...) {
        std::swap(index_, next);
        throw;
    }
    return profile;
}

std::string ProfileStore::save_profile(const PlayerProfile& profile) {
    std::string document = encode_profile(profile);
    atomic_write(player_path(profile.player_id), document);
    return document;
}

PlayerProfile ProfileStore::load_profile(const std::string& player_id, Timestamp now) const {
    PlayerProfile profile = decode_profile(read_file(player_path(player_id)), now);
    if (profile.player_id != player_id) corrupt("document id does not match " + player_id);
    return profile;
}

std::optional<std::string> ProfileStore::find_player(std::string_view name) const {
    std::lock_guard lock(index_mutex_);
    const auto it = index_.names.find(name_key(detail::trim(name)));
    if (it == index_.names.end()) return std::nullopt;
    return it->second;
}

std::string ProfileStore::allocate_session_id() {
    std::lock_guard lock(index_mutex_);
    const std::string id = format_id('s', index_.next_session);
    ++index_.next_session;
    write_index();
    return id;
}

void ProfileStore::save_session(const GameSession& session) {
    atomic_write(session_path(session.session_id), seal_document(to_json(session)));
}

GameSession ProfileStore::load_session(const std::string& session_id) const {
    GameSession session = session_from_json(open_document(read_file(session_path(session_id))));
    if (session.session_id != session_id) corrupt("document id does not match " + session_id);
    return session;
}

std::unique_lock<std::mutex> ProfileStore::lock_player(const std::string& player_id) {
    std::mutex* m = nullptr;
    {
        std::lock_guard guard(locks_mutex_);
        auto& slot = player_locks_[player_id];
        if (!slot) slot = std::make_unique<std::mutex>();
        m = slot.get();
    }
    return std::unique_lock<std::mutex>(*m);
}

}  // namespace pq
