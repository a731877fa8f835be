#include "pq/pattern_bank.hpp"

#include "pq/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace pq {

namespace {

struct KindName {
    PatternKind kind;
    std::string_view name;
    std::string_view short_name;
};

constexpr std::array<KindName, 6> kKindNames = {{
    {PatternKind::Arithmetic, "Arithmetic", "arithmetic"},
    {PatternKind::Geometric, "Geometric", "geometric"},
    {PatternKind::FibonacciLike, "FibonacciLike", "fibonacci"},
    {PatternKind::SquareNumbers, "SquareNumbers", "square"},
    {PatternKind::TriangularNumbers, "TriangularNumbers", "triangular"},
    {PatternKind::AlternatingRule, "AlternatingRule", "alternating"},
}};

struct ParamKey {
    std::string_view key;
    ParamRange DifficultyProfile::*member;
};

constexpr std::array<ParamKey, 11> kParamKeys = {{
    {"arithmetic.first", &DifficultyProfile::arithmetic_first},
    {"arithmetic.diff", &DifficultyProfile::arithmetic_diff},
    {"geometric.first", &DifficultyProfile::geometric_first},
    {"geometric.ratio", &DifficultyProfile::geometric_ratio},
    {"fibonacci.first", &DifficultyProfile::fibonacci_first},
    {"fibonacci.second", &DifficultyProfile::fibonacci_second},
    {"square.start", &DifficultyProfile::square_start},
    {"triangular.start", &DifficultyProfile::triangular_start},
    {"alternating.first", &DifficultyProfile::alternating_first},
    {"alternating.add", &DifficultyProfile::alternating_add},
    {"alternating.sub", &DifficultyProfile::alternating_sub},
}};

[[noreturn]] void inconsistent(PatternKind kind, std::string_view why) {
    throw Error(ErrorCode::InconsistentStem,
                std::string(to_string(kind)) + " stem: " + std::string(why));
}

std::int64_t checked_add(PatternKind kind, std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) inconsistent(kind, "overflow");
    return out;
}

std::int64_t checked_sub(PatternKind kind, std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_sub_overflow(a, b, &out)) inconsistent(kind, "overflow");
    return out;
}

std::int64_t checked_mul(PatternKind kind, std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) inconsistent(kind, "overflow");
    return out;
}

// Largest k with k*k <= n, n >= 0.
std::int64_t isqrt(std::int64_t n) {
    auto k = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(n)));
    while (k > 0 && k > n / k) --k;
    while ((k + 1) <= n / (k + 1)) ++k;
    return k;
}

std::int64_t triangular(PatternKind kind, std::int64_t k) {
    return checked_mul(kind, k, k + 1) / 2;
}

// Smallest k >= 0 with T(k) >= n, n >= 0.
std::int64_t triangular_index(std::int64_t n) {
    auto k = static_cast<std::int64_t>((std::sqrt(8.0L * static_cast<long double>(n) + 1.0L) - 1.0L) / 2.0L);
    while (k > 0 && k * (k + 1) / 2 >= n) --k;
    while (k * (k + 1) / 2 < n) ++k;
    return k;
}

DifficultyProfile make_profile(std::vector<PatternKind> kinds,
                               std::initializer_list<std::pair<std::int64_t, std::int64_t>> ranges) {
    DifficultyProfile profile;
    profile.kinds = std::move(kinds);
    auto it = ranges.begin();
    for (const auto& key : kParamKeys) {
        profile.*key.member = ParamRange{it->first, it->second};
        ++it;
    }
    return profile;
}

[[noreturn]] void bad_config(const std::string& message) {
    throw Error(ErrorCode::InvalidConfig, message);
}

ParamRange parse_range(std::string_view value, std::size_t line_no) {
    std::istringstream in{std::string(value)};
    ParamRange range;
    std::string rest;
    if (!(in >> range.lo >> range.hi) || (in >> rest)) {
        bad_config("line " + std::to_string(line_no) + ": expected `lo hi`");
    }
    return range;
}

}  // namespace

std::string_view to_string(PatternKind kind) noexcept {
    for (const auto& entry : kKindNames) {
        if (entry.kind == kind) return entry.name;
    }
    return "Arithmetic";
}

std::string_view to_string(Difficulty difficulty) noexcept {
    switch (difficulty) {
        case Difficulty::Easy: return "Easy";
        case Difficulty::Medium: return "Medium";
        case Difficulty::Hard: return "Hard";
    }
    return "Easy";
}

std::optional<PatternKind> parse_pattern_kind(std::string_view text) noexcept {
    const std::string lowered = detail::to_lower(text);
    for (const auto& entry : kKindNames) {
        if (lowered == detail::to_lower(entry.name) || lowered == entry.short_name) return entry.kind;
    }
    return std::nullopt;
}

std::optional<Difficulty> parse_difficulty(std::string_view text) noexcept {
    const std::string lowered = detail::to_lower(text);
    if (lowered == "easy") return Difficulty::Easy;
    if (lowered == "medium") return Difficulty::Medium;
    if (lowered == "hard") return Difficulty::Hard;
    return std::nullopt;
}

GeneratorConfig GeneratorConfig::defaults() {
    using K = PatternKind;
    GeneratorConfig config;
    // Order of ranges follows kParamKeys.
    config.profile(Difficulty::Easy) = make_profile(
        {K::Arithmetic, K::SquareNumbers, K::TriangularNumbers},
        {{1, 20}, {2, 12}, {1, 5}, {2, 3}, {1, 5}, {1, 8}, {1, 10}, {1, 10}, {1, 20}, {2, 9}, {1, 5}});
    config.profile(Difficulty::Medium) = make_profile(
        {K::Arithmetic, K::Geometric, K::FibonacciLike, K::SquareNumbers, K::TriangularNumbers},
        {{1, 50}, {4, 18}, {1, 9}, {2, 4}, {1, 12}, {1, 20}, {4, 20}, {4, 20}, {5, 40}, {3, 12}, {1, 8}});
    config.profile(Difficulty::Hard) = make_profile(
        {K::Arithmetic, K::Geometric, K::FibonacciLike, K::SquareNumbers, K::TriangularNumbers,
         K::AlternatingRule},
        {{-50, 100}, {7, 25}, {2, 12}, {2, 5}, {5, 30}, {5, 40}, {10, 40}, {10, 40}, {10, 80}, {5, 20}, {2, 15}});
    return config;
}

GeneratorConfig GeneratorConfig::parse(std::string_view text) {
    GeneratorConfig config = defaults();
    std::size_t line_no = 0;
    for (const auto& raw : detail::split_lines(text)) {
        ++line_no;
        const std::string_view line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) bad_config("line " + std::to_string(line_no) + ": missing '='");
        const std::string key = detail::to_lower(detail::trim(line.substr(0, eq)));
        const std::string_view value = detail::trim(line.substr(eq + 1));

        const auto dot = key.find('.');
        if (dot == std::string::npos) bad_config("line " + std::to_string(line_no) + ": unknown key " + key);
        const auto difficulty = parse_difficulty(std::string_view(key).substr(0, dot));
        if (!difficulty) bad_config("line " + std::to_string(line_no) + ": unknown difficulty in " + key);
        DifficultyProfile& profile = config.profile(*difficulty);
        const std::string_view param = std::string_view(key).substr(dot + 1);

        if (param == "kinds") {
            profile.kinds.clear();
            std::istringstream in{std::string(value)};
            std::string word;
            while (in >> word) {
                const auto kind = parse_pattern_kind(word);
                if (!kind) bad_config("line " + std::to_string(line_no) + ": unknown pattern kind " + word);
                profile.kinds.push_back(*kind);
            }
            continue;
        }
        const auto found = std::find_if(kParamKeys.begin(), kParamKeys.end(),
                                        [&](const ParamKey& k) { return k.key == param; });
        if (found == kParamKeys.end()) bad_config("line " + std::to_string(line_no) + ": unknown key " + key);
        profile.*found->member = parse_range(value, line_no);
    }
    config.validate();
    return config;
}

GeneratorConfig GeneratorConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad_config("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void GeneratorConfig::validate() const {
    for (const Difficulty difficulty : kAllDifficulties) {
        const DifficultyProfile& p = profile(difficulty);
        const std::string where(to_string(difficulty));
        if (p.kinds.empty()) bad_config(where + ": no pattern kinds enabled");
        for (std::size_t i = 0; i < p.kinds.size(); ++i) {
            if (std::count(p.kinds.begin(), p.kinds.end(), p.kinds[i]) != 1) {
                bad_config(where + ": duplicate kind " + std::string(to_string(p.kinds[i])));
            }
        }
        for (const auto& key : kParamKeys) {
            const ParamRange& r = p.*key.member;
            const std::string name = where + "." + std::string(key.key);
            if (r.lo > r.hi) bad_config(name + ": empty range");
            if (r.lo < -kParamMagnitudeLimit || r.hi > kParamMagnitudeLimit) bad_config(name + ": out of bounds");
        }
        auto require_min = [&](const ParamRange& r, std::int64_t min, std::string_view key) {
            if (r.lo < min) bad_config(where + "." + std::string(key) + ": must be >= " + std::to_string(min));
        };
        require_min(p.arithmetic_diff, 1, "arithmetic.diff");
        require_min(p.geometric_first, 1, "geometric.first");
        require_min(p.geometric_ratio, 2, "geometric.ratio");
        if (p.geometric_ratio.hi > 5) bad_config(where + ".geometric.ratio: must be <= 5");
        require_min(p.fibonacci_first, 1, "fibonacci.first");
        require_min(p.fibonacci_second, 1, "fibonacci.second");
        require_min(p.square_start, 0, "square.start");
        require_min(p.triangular_start, 0, "triangular.start");
        require_min(p.alternating_add, 1, "alternating.add");
        require_min(p.alternating_sub, 1, "alternating.sub");
    }
}

std::size_t min_stem_length(PatternKind kind) noexcept {
    switch (kind) {
        case PatternKind::FibonacciLike:
        case PatternKind::AlternatingRule: return 3;
        default: return 2;
    }
}

std::int64_t next_term(PatternKind kind, std::span<const std::int64_t> stem) {
    const std::size_t n = stem.size();
    if (n < min_stem_length(kind)) inconsistent(kind, "too few terms");

    switch (kind) {
        case PatternKind::Arithmetic: {
            const std::int64_t diff = checked_sub(kind, stem[1], stem[0]);
            for (std::size_t i = 2; i < n; ++i) {
                if (checked_sub(kind, stem[i], stem[i - 1]) != diff) inconsistent(kind, "difference not constant");
            }
            return checked_add(kind, stem[n - 1], diff);
        }
        case PatternKind::Geometric: {
            if (stem[0] == 0 || stem[1] % stem[0] != 0) inconsistent(kind, "no integer ratio");
            const std::int64_t ratio = stem[1] / stem[0];
            for (std::size_t i = 2; i < n; ++i) {
                if (checked_mul(kind, stem[i - 1], ratio) != stem[i]) inconsistent(kind, "ratio not constant");
            }
            return checked_mul(kind, stem[n - 1], ratio);
        }
        case PatternKind::FibonacciLike: {
            for (std::size_t i = 2; i < n; ++i) {
                if (checked_add(kind, stem[i - 2], stem[i - 1]) != stem[i]) {
                    inconsistent(kind, "term is not the sum of the previous two");
                }
            }
            return checked_add(kind, stem[n - 2], stem[n - 1]);
        }
        case PatternKind::SquareNumbers: {
            if (stem[0] < 0) inconsistent(kind, "negative term");
            const std::int64_t k = isqrt(stem[0]);
            for (std::size_t i = 0; i < n; ++i) {
                const std::int64_t root = k + static_cast<std::int64_t>(i);
                if (checked_mul(kind, root, root) != stem[i]) inconsistent(kind, "not consecutive squares");
            }
            const std::int64_t root = k + static_cast<std::int64_t>(n);
            return checked_mul(kind, root, root);
        }
        case PatternKind::TriangularNumbers: {
            if (stem[0] < 0) inconsistent(kind, "negative term");
            const std::int64_t k = triangular_index(stem[0]);
            for (std::size_t i = 0; i < n; ++i) {
                if (triangular(kind, k + static_cast<std::int64_t>(i)) != stem[i]) {
                    inconsistent(kind, "not consecutive triangular numbers");
                }
            }
            return triangular(kind, k + static_cast<std::int64_t>(n));
        }
        case PatternKind::AlternatingRule: {
            // Differences repeat with period two.
            for (std::size_t i = 3; i < n; ++i) {
                if (checked_sub(kind, stem[i], stem[i - 1]) != checked_sub(kind, stem[i - 2], stem[i - 3])) {
                    inconsistent(kind, "differences do not alternate");
                }
            }
            return checked_add(kind, stem[n - 1], checked_sub(kind, stem[n - 2], stem[n - 3]));
        }
    }
    inconsistent(kind, "unknown kind");
}

std::array<std::int64_t, 3> make_distractors(std::int64_t answer, PatternKind /*kind*/,
                                             std::span<const std::int64_t> stem, SplitMix64& rng) {
    const std::int64_t last = stem.back();
    const std::int64_t d = stem.size() >= 2 ? last - stem[stem.size() - 2] : 0;
    std::array<std::int64_t, 7> candidates = {answer + d, answer - d, answer + 1, answer - 1,
                                              last,       answer + 2 * d, answer - 2 * d};
    for (std::size_t i = candidates.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(i)));
        std::swap(candidates[i], candidates[j]);
    }

    std::array<std::int64_t, 3> out{};
    std::size_t count = 0;
    auto take = [&](std::int64_t value) {
        if (count == out.size() || value == answer) return;
        if (std::find(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(count), value) !=
            out.begin() + static_cast<std::ptrdiff_t>(count)) {
            return;
        }
        out[count++] = value;
    };
    for (const std::int64_t c : candidates) take(c);
    for (std::int64_t step = 2; count < out.size(); ++step) {
        take(answer + step);
        take(answer - step);
    }
    return out;
}

QuestionCard generate_question(std::uint64_t seed, Difficulty difficulty, const GeneratorConfig& config) {
    const DifficultyProfile& p = config.profile(difficulty);
    SplitMix64 rng(seed);
    auto draw = [&rng](const ParamRange& r) { return rng.uniform(r.lo, r.hi); };

    QuestionCard card;
    card.seed = seed;
    card.difficulty = difficulty;
    card.kind = p.kinds[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(p.kinds.size()) - 1))];

    auto& s = card.stem;
    switch (card.kind) {
        case PatternKind::Arithmetic: {
            const std::int64_t first = draw(p.arithmetic_first);
            const std::int64_t diff = draw(p.arithmetic_diff);
            for (std::size_t i = 0; i < kStemLength; ++i) s[i] = first + static_cast<std::int64_t>(i) * diff;
            break;
        }
        case PatternKind::Geometric: {
            const std::int64_t first = draw(p.geometric_first);
            const std::int64_t ratio = draw(p.geometric_ratio);
            s[0] = first;
            for (std::size_t i = 1; i < kStemLength; ++i) s[i] = s[i - 1] * ratio;
            break;
        }
        case PatternKind::FibonacciLike: {
            s[0] = draw(p.fibonacci_first);
            s[1] = draw(p.fibonacci_second);
            for (std::size_t i = 2; i < kStemLength; ++i) s[i] = s[i - 1] + s[i - 2];
            break;
        }
        case PatternKind::SquareNumbers: {
            const std::int64_t k = draw(p.square_start);
            for (std::size_t i = 0; i < kStemLength; ++i) {
                const std::int64_t root = k + static_cast<std::int64_t>(i);
                s[i] = root * root;
            }
            break;
        }
        case PatternKind::TriangularNumbers: {
            const std::int64_t k = draw(p.triangular_start);
            for (std::size_t i = 0; i < kStemLength; ++i) {
                const std::int64_t j = k + static_cast<std::int64_t>(i);
                s[i] = j * (j + 1) / 2;
            }
            break;
        }
        case PatternKind::AlternatingRule: {
            const std::int64_t first = draw(p.alternating_first);
            const std::int64_t add = draw(p.alternating_add);
            const std::int64_t sub = draw(p.alternating_sub);
            s[0] = first;
            for (std::size_t i = 1; i < kStemLength; ++i) s[i] = s[i - 1] + (i % 2 == 1 ? add : -sub);
            break;
        }
    }

    const std::int64_t answer = next_term(card.kind, s);
    const auto distractors = make_distractors(answer, card.kind, s, rng);
    card.choices = {answer, distractors[0], distractors[1], distractors[2]};
    for (std::size_t i = kChoiceCount - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(i)));
        std::swap(card.choices[i], card.choices[j]);
    }
    card.correct_index = static_cast<int>(
        std::find(card.choices.begin(), card.choices.end(), answer) - card.choices.begin());

    char id[32];
    std::snprintf(id, sizeof id, "%c-%016llx", to_string(difficulty)[0], static_cast<unsigned long long>(seed));
    card.id = id;
    return card;
}

}  // namespace pq
