#pragma once

#include "pq/gameplay.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pq {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

/// Days since 1970-01-01 (UTC calendar date).
using DayKey = std::int64_t;

DayKey utc_day(Timestamp t) noexcept;
std::string format_day(DayKey day);
std::optional<DayKey> parse_day(std::string_view text);

struct EconomyConfig {
    std::int64_t points_per_correct = 10;
    std::int64_t victory_bonus = 50;
    std::int64_t quest_reward = 25;
    int energy_max_base = 5;
    int energy_regen_minutes = 20;
    int premium_energy_max = 7;
    std::int64_t premium_per_correct_bonus = 2;
    int lifeline_cap = 5;

    /// Throws Error{InvalidConfig}.
    void validate() const;

    /// `key = value` lines over the defaults; keys are the field names.
    static EconomyConfig parse(std::string_view text);
    static EconomyConfig load(const std::string& path);

    friend bool operator==(const EconomyConfig&, const EconomyConfig&) = default;
};

enum class Perk { None, Premium };

struct Avatar {
    std::string id;
    std::string display_name;
    std::int64_t price = 0;
    Perk perk = Perk::None;

    friend bool operator==(const Avatar&, const Avatar&) = default;
};

class AvatarCatalog {
public:
    /// Throws Error{InvalidConfig} unless exactly one avatar is free and
    /// exactly one is Premium, the Premium one being strictly the priciest.
    explicit AvatarCatalog(std::vector<Avatar> entries);

    /// Starter 0, Scholar 100, Wizard 250, Dragon 600 (Premium).
    static AvatarCatalog defaults();

    /// Lines `avatar <id> <price> <none|premium> <display name...>`.
    static AvatarCatalog parse(std::string_view text);
    static AvatarCatalog load(const std::string& path);

    const std::vector<Avatar>& entries() const noexcept { return entries_; }
    const Avatar* find(std::string_view id) const noexcept;
    const Avatar& starter() const;
    const Avatar& premium() const;

    friend bool operator==(const AvatarCatalog&, const AvatarCatalog&) = default;

private:
    std::vector<Avatar> entries_;
};

struct Wallet {
    std::int64_t points = 0;
    int energy = 0;
    Timestamp energy_last_refill = 0;
    std::set<std::string> owned_avatars;
    std::string active_avatar;

    friend bool operator==(const Wallet&, const Wallet&) = default;
};

/// Starter avatar owned and active, energy full, no points.
Wallet new_wallet(Timestamp now, const EconomyConfig& config, const AvatarCatalog& catalog);

bool premium_active(const Wallet& wallet, const AvatarCatalog& catalog);
int effective_energy_max(const Wallet& wallet, const EconomyConfig& config, const AvatarCatalog& catalog);

/// Points one answer is worth with the wallet's active avatar.
std::int64_t answer_points(bool correct, const Wallet& wallet, const EconomyConfig& config,
                           const AvatarCatalog& catalog);

/// Per-session scoring snapshot for gameplay::start_session.
Scoring session_scoring(const Wallet& wallet, const EconomyConfig& config, const AvatarCatalog& catalog);
LifelineRules lifeline_rules(const EconomyConfig& config);

Wallet award_answer(Wallet wallet, bool correct, const EconomyConfig& config, const AvatarCatalog& catalog);

/// Adds a non-negative amount (turn deltas, bonuses).
Wallet credit_points(Wallet wallet, std::int64_t amount);

/// Throws Error{UnknownAvatar}, Error{AlreadyOwned}, Error{InsufficientPoints};
/// the input wallet is never modified.
Wallet purchase_avatar(const Wallet& wallet, std::string_view avatar_id, const AvatarCatalog& catalog);

/// Makes an owned avatar active; energy is clamped to the new effective max.
/// Throws Error{UnknownAvatar}, Error{NotOwned}.
Wallet equip_avatar(const Wallet& wallet, std::string_view avatar_id, const EconomyConfig& config,
                    const AvatarCatalog& catalog);

/// Lazy regeneration: one energy per whole regen interval since
/// energy_last_refill, capped at the effective max. The refill clock advances
/// by the intervals consumed, and idles (is set to `now`) while energy is full.
Wallet regenerate_energy(Wallet wallet, Timestamp now, const EconomyConfig& config, const AvatarCatalog& catalog);

/// Regenerates, then debits one energy. Throws Error{EnergyDepleted}.
Wallet consume_energy(const Wallet& wallet, Timestamp now, const EconomyConfig& config,
                      const AvatarCatalog& catalog);

/// Seconds until the next energy unit, or 0 when full.
std::int64_t seconds_to_next_energy(const Wallet& wallet, Timestamp now, const EconomyConfig& config,
                                    const AvatarCatalog& catalog);

inline constexpr std::string_view kQuestCorrectAnswers10 = "CorrectAnswers10";
inline constexpr std::string_view kQuestFinishOneGame = "FinishOneGame";
inline constexpr int kCorrectAnswersQuestTarget = 10;

struct QuestState {
    DayKey day_key = 0;
    int correct_answers = 0;
    bool finished_game = false;
    std::set<std::string> claimed;

    friend bool operator==(const QuestState&, const QuestState&) = default;
};

QuestState fresh_quests(Timestamp now);

/// Resets progress and claims when `now` falls on a different UTC date than day_key.
QuestState roll_quest_day(QuestState quest, Timestamp now);

enum class QuestEvent { CorrectAnswer, GameFinished };

/// Applies the event and pays quest_reward the first time a quest's target
/// is reached on a given UTC day.
std::pair<QuestState, Wallet> record_quest_progress(QuestState quest, QuestEvent event, Timestamp now,
                                                    Wallet wallet, const EconomyConfig& config);

}  // namespace pq
