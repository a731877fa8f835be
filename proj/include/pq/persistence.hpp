#pragma once

#include "pq/economy.hpp"
#include "pq/gameplay.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pq {

/// Version written by this build. Version 1 documents lack `quests` and
/// `sessions`; migrate() fills them in.
inline constexpr int kProfileSchemaVersion = 2;
inline constexpr int kSessionSchemaVersion = 1;
inline constexpr std::size_t kMaxNameLength = 32;

struct PlayerSettings {
    bool music_on = true;
    int volume = 80;

    friend bool operator==(const PlayerSettings&, const PlayerSettings&) = default;
};

/// Throws Error{InvalidSettings} unless volume is within 0..100.
void validate_settings(const PlayerSettings& settings);

struct PlayerStats {
    std::int64_t games_played = 0;
    std::int64_t victories = 0;
    std::int64_t questions_answered = 0;
    std::int64_t correct_answers = 0;

    friend bool operator==(const PlayerStats&, const PlayerStats&) = default;
};

struct PlayerProfile {
    std::string player_id;
    std::string name;
    PlayerSettings settings;
    Wallet wallet;
    QuestState quests;
    PlayerStats stats;
    /// Ids of every session this player started, oldest first.
    std::vector<std::string> sessions;
    Timestamp created_at = 0;
    Timestamp updated_at = 0;
    int schema_version = kProfileSchemaVersion;
    /// Top-level fields this build does not know, carried through verbatim.
    nlohmann::json extra = nlohmann::json::object();

    friend bool operator==(const PlayerProfile&, const PlayerProfile&) = default;
};

/// Trims surrounding whitespace and checks 1..32 code points with no control
/// characters. Throws Error{InvalidName}.
std::string normalize_name(std::string_view raw);

/// Case-insensitive key used by the name index.
std::string name_key(std::string_view normalized_name);

// JSON codecs. Field names are the on-disk names documented in docs/save_format.md.
nlohmann::json to_json(const Wallet& wallet);
Wallet wallet_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QuestState& quests);
QuestState quests_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QuestionCard& card);
QuestionCard card_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoardSpec& board);
BoardSpec board_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TurnRecord& record);
TurnRecord turn_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PlayerProfile& profile);
PlayerProfile profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GameSession& session);
GameSession session_from_json(const nlohmann::json& j);

/// Wraps a JSON body as a stored document: the body pretty-printed with
/// 2-space indent and sorted keys, a newline, then `#crc32 xxxxxxxx\n` where
/// the hex digits are the CRC-32 (IEEE) of every byte before the footer.
std::string seal_document(const nlohmann::json& body);

/// Verifies the footer and parses the body. Throws Error{LoadCorrupt}.
nlohmann::json open_document(std::string_view text);

/// Upgrades a profile body to kProfileSchemaVersion, preserving unknown
/// fields. Throws Error{UnsupportedVersion} for newer documents and
/// Error{LoadCorrupt} when schema_version is missing.
nlohmann::json migrate(nlohmann::json body, Timestamp now);

std::string encode_profile(const PlayerProfile& profile);
PlayerProfile decode_profile(std::string_view document, Timestamp now);

/// Writes via a temporary file in the same directory, fsync, then rename,
/// so readers observe either the old or the new contents.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

/// File-backed store: `players/<id>.json`, `sessions/<id>.json` and an
/// `index.json` mapping lower-cased names to ids. One writer per player at a
/// time: callers hold lock_player() around read-modify-write cycles.
class ProfileStore {
public:
    /// Creates the directory layout. Throws Error{DataDirUnwritable}.
    ProfileStore(std::filesystem::path data_dir, EconomyConfig economy, AvatarCatalog catalog);

    ProfileStore(const ProfileStore&) = delete;
    ProfileStore& operator=(const ProfileStore&) = delete;

    /// Linearizable with respect to the name index. Throws Error{InvalidName},
    /// Error{DuplicateName}.
    PlayerProfile register_player(std::string_view name, Timestamp now);

    /// Returns the stored document text.
    std::string save_profile(const PlayerProfile& profile);

    /// Throws Error{NotFound}, Error{LoadCorrupt}, Error{UnsupportedVersion}.
    PlayerProfile load_profile(const std::string& player_id, Timestamp now) const;

    std::optional<std::string> find_player(std::string_view name) const;

    std::string allocate_session_id();
    void save_session(const GameSession& session);
    GameSession load_session(const std::string& session_id) const;

    [[nodiscard]] std::unique_lock<std::mutex> lock_player(const std::string& player_id);

    const std::filesystem::path& data_dir() const noexcept { return data_dir_; }
    const EconomyConfig& economy() const noexcept { return economy_; }
    const AvatarCatalog& catalog() const noexcept { return catalog_; }

private:
    struct Index {
        std::int64_t next_player = 1;
        std::int64_t next_session = 1;
        std::map<std::string, std::string> names;
    };

    std::filesystem::path player_path(const std::string& id) const;
    std::filesystem::path session_path(const std::string& id) const;
    void write_index() const;

    std::filesystem::path data_dir_;
    EconomyConfig economy_;
    AvatarCatalog catalog_;

    mutable std::mutex index_mutex_;
    Index index_;

    std::mutex locks_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> player_locks_;
};

}  // namespace pq
