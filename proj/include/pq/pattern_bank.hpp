#pragma once

#include "pq/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pq {

enum class PatternKind {
    Arithmetic,
    Geometric,
    FibonacciLike,
    SquareNumbers,
    TriangularNumbers,
    AlternatingRule,
};

inline constexpr std::array<PatternKind, 6> kAllPatternKinds = {
    PatternKind::Arithmetic,        PatternKind::Geometric,     PatternKind::FibonacciLike,
    PatternKind::SquareNumbers,     PatternKind::TriangularNumbers, PatternKind::AlternatingRule,
};

enum class Difficulty { Easy, Medium, Hard };

inline constexpr std::array<Difficulty, 3> kAllDifficulties = {Difficulty::Easy, Difficulty::Medium,
                                                               Difficulty::Hard};

std::string_view to_string(PatternKind kind) noexcept;
std::string_view to_string(Difficulty difficulty) noexcept;
std::optional<PatternKind> parse_pattern_kind(std::string_view text) noexcept;
std::optional<Difficulty> parse_difficulty(std::string_view text) noexcept;

inline constexpr std::size_t kStemLength = 4;
inline constexpr std::size_t kChoiceCount = 4;

struct QuestionCard {
    std::string id;
    PatternKind kind = PatternKind::Arithmetic;
    std::array<std::int64_t, kStemLength> stem{};
    std::array<std::int64_t, kChoiceCount> choices{};
    int correct_index = 0;
    Difficulty difficulty = Difficulty::Easy;
    std::uint64_t seed = 0;

    std::int64_t answer() const { return choices.at(static_cast<std::size_t>(correct_index)); }

    friend bool operator==(const QuestionCard&, const QuestionCard&) = default;
};

/// Inclusive parameter interval.
struct ParamRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    friend bool operator==(const ParamRange&, const ParamRange&) = default;
};

/// Parameter ranges for one difficulty level. Which fields a kind reads:
///   Arithmetic        arithmetic_first, arithmetic_diff
///   Geometric         geometric_first, geometric_ratio
///   FibonacciLike     fibonacci_first, fibonacci_second
///   SquareNumbers     square_start        (stem is k^2, (k+1)^2, ...)
///   TriangularNumbers triangular_start    (stem is T(k), T(k+1), ...)
///   AlternatingRule   alternating_first, alternating_add, alternating_sub
///                     (stem alternately adds `add` and subtracts `sub`)
struct DifficultyProfile {
    std::vector<PatternKind> kinds;
    ParamRange arithmetic_first;
    ParamRange arithmetic_diff;
    ParamRange geometric_first;
    ParamRange geometric_ratio;
    ParamRange fibonacci_first;
    ParamRange fibonacci_second;
    ParamRange square_start;
    ParamRange triangular_start;
    ParamRange alternating_first;
    ParamRange alternating_add;
    ParamRange alternating_sub;

    friend bool operator==(const DifficultyProfile&, const DifficultyProfile&) = default;
};

/// Bounds every parameter must respect; with them no stem term, answer or
/// distractor can leave the signed 64-bit range.
inline constexpr std::int64_t kParamMagnitudeLimit = 1'000'000;

class GeneratorConfig {
public:
    /// Compiled-in defaults (mirrors assets/config/generator.conf).
    static GeneratorConfig defaults();

    /// Parses `difficulty.kind.param = lo hi` and `difficulty.kinds = k1 k2 ...`
    /// lines on top of the defaults. Throws Error{InvalidConfig}.
    static GeneratorConfig parse(std::string_view text);
    static GeneratorConfig load(const std::string& path);

    /// Throws Error{InvalidConfig} describing the first violated bound.
    void validate() const;

    const DifficultyProfile& profile(Difficulty difficulty) const {
        return profiles_.at(static_cast<std::size_t>(difficulty));
    }
    DifficultyProfile& profile(Difficulty difficulty) {
        return profiles_.at(static_cast<std::size_t>(difficulty));
    }

    friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;

private:
    std::array<DifficultyProfile, 3> profiles_;
};

/// Minimum stem length next_term accepts for a kind.
std::size_t min_stem_length(PatternKind kind) noexcept;

/// The unique next term of `stem` under the kind's rule.
/// Throws Error{InconsistentStem} if the stem does not follow the rule.
std::int64_t next_term(PatternKind kind, std::span<const std::int64_t> stem);

/// Three distinct wrong answers. Candidates, in this fixed order, with
/// d = last stem difference:
///   answer + d, answer - d, answer + 1, answer - 1, last term,
///   answer + 2d, answer - 2d
/// are Fisher-Yates shuffled with `rng`; the first three distinct values that
/// differ from `answer` win. Should fewer than three survive (a stem with d = 0)
/// answer + 2, answer - 2, answer + 3, ... are appended in that order.
std::array<std::int64_t, 3> make_distractors(std::int64_t answer, PatternKind kind,
                                             std::span<const std::int64_t> stem, SplitMix64& rng);

/// Deterministic in (seed, difficulty, config). Draw order from SplitMix64(seed):
/// kind index, the kind's parameters in declaration order, distractor shuffle,
/// then the choice shuffle.
QuestionCard generate_question(std::uint64_t seed, Difficulty difficulty, const GeneratorConfig& config);

}  // namespace pq
