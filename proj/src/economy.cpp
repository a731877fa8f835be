#include "pq/economy.hpp"

#include "pq/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pq {

namespace {

constexpr std::int64_t kSecondsPerDay = 86'400;

[[noreturn]] void bad_config(const std::string& message) {
    throw Error(ErrorCode::InvalidConfig, message);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad_config("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const Avatar& require_avatar(const AvatarCatalog& catalog, std::string_view id) {
    const Avatar* avatar = catalog.find(id);
    if (avatar == nullptr) throw Error(ErrorCode::UnknownAvatar, "no avatar " + std::string(id));
    return *avatar;
}

}  // namespace

DayKey utc_day(Timestamp t) noexcept {
    // Floor division so pre-epoch instants land on the right date.
    return t >= 0 ? t / kSecondsPerDay : -((-t + kSecondsPerDay - 1) / kSecondsPerDay);
}

std::string format_day(DayKey day) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{days{day}}};
    char buffer[16];
    std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buffer;
}

std::optional<DayKey> parse_day(std::string_view text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (text.size() != 10 ||
        std::sscanf(std::string(text).c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
        return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd}.time_since_epoch().count();
}

void EconomyConfig::validate() const {
    if (points_per_correct <= 0 || victory_bonus <= 0 || quest_reward <= 0 || energy_max_base <= 0 ||
        energy_regen_minutes <= 0 || premium_energy_max <= 0 || premium_per_correct_bonus <= 0 ||
        lifeline_cap <= 0) {
        bad_config("economy values must all be positive");
    }
    if (premium_energy_max < energy_max_base) bad_config("premium_energy_max must be >= energy_max_base");
    if (lifeline_cap < LifelineRules{}.start) bad_config("lifeline_cap must be >= the starting lifelines");
}

EconomyConfig EconomyConfig::parse(std::string_view text) {
    EconomyConfig config;
    std::size_t line_no = 0;
    for (const auto& raw : detail::split_lines(text)) {
        ++line_no;
        const std::string_view line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) bad_config(where + "missing '='");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        std::int64_t number = 0;
        std::size_t used = 0;
        try {
            number = std::stoll(value, &used);
        } catch (const std::exception&) {
            bad_config(where + "expected an integer");
        }
        if (used != value.size()) bad_config(where + "expected an integer");
        auto as_int = [&] { return static_cast<int>(std::clamp<std::int64_t>(number, -1, 1'000'000)); };
        if (key == "points_per_correct") config.points_per_correct = number;
        else if (key == "victory_bonus") config.victory_bonus = number;
        else if (key == "quest_reward") config.quest_reward = number;
        else if (key == "energy_max_base") config.energy_max_base = as_int();
        else if (key == "energy_regen_minutes") config.energy_regen_minutes = as_int();
        else if (key == "premium_energy_max") config.premium_energy_max = as_int();
        else if (key == "premium_per_correct_bonus") config.premium_per_correct_bonus = number;
        else if (key == "lifeline_cap") config.lifeline_cap = as_int();
        else bad_config(where + "unknown key " + key);
    }
    config.validate();
    return config;
}

EconomyConfig EconomyConfig::load(const std::string& path) { return parse(read_file(path)); }

AvatarCatalog::AvatarCatalog(std::vector<Avatar> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) bad_config("avatar catalog is empty");
    std::set<std::string> ids;
    int free_count = 0;
    int premium_count = 0;
    for (const Avatar& a : entries_) {
        if (a.id.empty() || !ids.insert(a.id).second) bad_config("avatar ids must be unique and nonempty");
        if (a.price < 0) bad_config("avatar " + a.id + " has a negative price");
        if (a.price == 0) ++free_count;
        if (a.perk == Perk::Premium) ++premium_count;
    }
    if (free_count != 1) bad_config("catalog needs exactly one free starter avatar");
    if (premium_count != 1) bad_config("catalog needs exactly one Premium avatar");
    const Avatar& prem = premium();
    for (const Avatar& a : entries_) {
        if (&a != &prem && a.price >= prem.price) bad_config("the Premium avatar must be strictly the most expensive");
    }
}

AvatarCatalog AvatarCatalog::defaults() {
    return AvatarCatalog({
        {"starter", "Starter", 0, Perk::None},
        {"scholar", "Scholar", 100, Perk::None},
        {"wizard", "Wizard", 250, Perk::None},
        {"dragon", "Dragon", 600, Perk::Premium},
    });
}

AvatarCatalog AvatarCatalog::parse(std::string_view text) {
    std::vector<Avatar> entries;
    std::size_t line_no = 0;
    for (const auto& raw : detail::split_lines(text)) {
        ++line_no;
        const std::string_view line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        std::istringstream in{std::string(line)};
        std::string keyword;
        std::string perk;
        Avatar avatar;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (!(in >> keyword >> avatar.id >> avatar.price >> perk) || keyword != "avatar") {
            bad_config(where + "expected `avatar <id> <price> <none|premium> <name>`");
        }
        const std::string lowered = detail::to_lower(perk);
        if (lowered == "premium") avatar.perk = Perk::Premium;
        else if (lowered != "none") bad_config(where + "unknown perk " + perk);
        std::getline(in, avatar.display_name);
        avatar.display_name = std::string(detail::trim(avatar.display_name));
        if (avatar.display_name.empty()) avatar.display_name = avatar.id;
        entries.push_back(std::move(avatar));
    }
    return AvatarCatalog(std::move(entries));
}

AvatarCatalog AvatarCatalog::load(const std::string& path) { return parse(read_file(path)); }

const Avatar* AvatarCatalog::find(std::string_view id) const noexcept {
    const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Avatar& a) { return a.id == id; });
    return it == entries_.end() ? nullptr : &*it;
}

const Avatar& AvatarCatalog::starter() const {
    return *std::find_if(entries_.begin(), entries_.end(), [](const Avatar& a) { return a.price == 0; });
}

const Avatar& AvatarCatalog::premium() const {
    return *std::find_if(entries_.begin(), entries_.end(), [](const Avatar& a) { return a.perk == Perk::Premium; });
}

Wallet new_wallet(Timestamp now, const EconomyConfig& config, const AvatarCatalog& catalog) {
    Wallet wallet;
    wallet.active_avatar = catalog.starter().id;
    wallet.owned_avatars.insert(wallet.active_avatar);
    wallet.energy = effective_energy_max(wallet, config, catalog);
    wallet.energy_last_refill = now;
    return wallet;
}

bool premium_active(const Wallet& wallet, const AvatarCatalog& catalog) {
    const Avatar* active = catalog.find(wallet.active_avatar);
    return active != nullptr && active->perk == Perk::Premium;
}

int effective_energy_max(const Wallet& wallet, const EconomyConfig& config, const AvatarCatalog& catalog) {
    return premium_active(wallet, catalog) ? config.premium_energy_max : config.energy_max_base;
}

std::int64_t answer_points(bool correct, const Wallet& wallet, const EconomyConfig& config,
                           const AvatarCatalog& catalog) {
    if (!correct) return 0;
    return config.points_per_correct + (premium_active(wallet, catalog) ? config.premium_per_correct_bonus : 0);
}

Scoring session_scoring(const Wallet& wallet, const EconomyConfig& config, const AvatarCatalog& catalog) {
    return Scoring{answer_points(true, wallet, config, catalog), config.victory_bonus};
}

LifelineRules lifeline_rules(const EconomyConfig& config) {
    LifelineRules rules;
    rules.cap = config.lifeline_cap;
    return rules;
}

Wallet award_answer(Wallet wallet, bool correct, const EconomyConfig& config, const AvatarCatalog& catalog) {
    wallet.points += answer_points(correct, wallet, config, catalog);
    return wallet;
}

Wallet credit_points(Wallet wallet, std::int64_t amount) {
    if (amount < 0) throw Error(ErrorCode::Internal, "credit amount must be non-negative");
    wallet.points += amount;
    return wallet;
}

Wallet purchase_avatar(const Wallet& wallet, std::string_view avatar_id, const AvatarCatalog& catalog) {
    const Avatar& avatar = require_avatar(catalog, avatar_id);
    if (wallet.owned_avatars.count(avatar.id) != 0) throw Error(ErrorCode::AlreadyOwned, avatar.id + " is already owned");
    if (wallet.points < avatar.price) {
        throw Error(ErrorCode::InsufficientPoints, "need " + std::to_string(avatar.price - wallet.points) + " more points");
    }
    Wallet out = wallet;
    out.points -= avatar.price;
    out.owned_avatars.insert(avatar.id);
    return out;
}

Wallet equip_avatar(const Wallet& wallet, std::string_view avatar_id, const EconomyConfig& config,
                    const AvatarCatalog& catalog) {
    const Avatar& avatar = require_avatar(catalog, avatar_id);
    if (wallet.owned_avatars.count(avatar.id) == 0) throw Error(ErrorCode::NotOwned, avatar.id + " is not owned");
    Wallet out = wallet;
    out.active_avatar = avatar.id;
    out.energy = std::min(out.energy, effective_energy_max(out, config, catalog));
    return out;
}

Wallet regenerate_energy(Wallet wallet, Timestamp now, const EconomyConfig& config, const AvatarCatalog& catalog) {
    const int max = effective_energy_max(wallet, config, catalog);
    if (wallet.energy >= max) {
        wallet.energy = max;
        wallet.energy_last_refill = std::max(wallet.energy_last_refill, now);
        return wallet;
    }
    const std::int64_t interval = std::int64_t{config.energy_regen_minutes} * 60;
    const std::int64_t elapsed = std::max<std::int64_t>(0, now - wallet.energy_last_refill);
    const std::int64_t gained = elapsed / interval;
    if (gained >= max - wallet.energy) {
        wallet.energy = max;
        wallet.energy_last_refill = now;
    } else {
        wallet.energy += static_cast<int>(gained);
        wallet.energy_last_refill += gained * interval;
    }
    return wallet;
}

Wallet consume_energy(const Wallet& wallet, Timestamp now, const EconomyConfig& config,
                      const AvatarCatalog& catalog) {
    Wallet out = regenerate_energy(wallet, now, config, catalog);
    if (out.energy == 0) {
        throw Error(ErrorCode::EnergyDepleted,
                    "out of energy; next unit in " +
                        std::to_string(seconds_to_next_energy(out, now, config, catalog)) + " s");
    }
    --out.energy;
    return out;
}

std::int64_t seconds_to_next_energy(const Wallet& wallet, Timestamp now, const EconomyConfig& config,
                                    const AvatarCatalog& catalog) {
    const Wallet current = regenerate_energy(wallet, now, config, catalog);
    if (current.energy >= effective_energy_max(current, config, catalog)) return 0;
    const std::int64_t interval = std::int64_t{config.energy_regen_minutes} * 60;
    return current.energy_last_refill + interval - now;
}

QuestState fresh_quests(Timestamp now) {
    QuestState quest;
    quest.day_key = utc_day(now);
    return quest;
}

QuestState roll_quest_day(QuestState quest, Timestamp now) {
    if (utc_day(now) != quest.day_key) return fresh_quests(now);
    return quest;
}

std::pair<QuestState, Wallet> record_quest_progress(QuestState quest, QuestEvent event, Timestamp now,
                                                    Wallet wallet, const EconomyConfig& config) {
    quest = roll_quest_day(std::move(quest), now);
    auto claim = [&](std::string_view id) {
        if (quest.claimed.insert(std::string(id)).second) wallet.points += config.quest_reward;
    };
    switch (event) {
        case QuestEvent::CorrectAnswer:
            quest.correct_answers = std::min(quest.correct_answers + 1, kCorrectAnswersQuestTarget);
            if (quest.correct_answers >= kCorrectAnswersQuestTarget) claim(kQuestCorrectAnswers10);
            break;
        case QuestEvent::GameFinished:
            quest.finished_game = true;
            claim(kQuestFinishOneGame);
            break;
    }
    return {std::move(quest), std::move(wallet)};
}

}  // namespace pq
