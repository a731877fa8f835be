#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pq::eval {

/// The eight Octalysis core drives.
enum class Driver {
    EpicMeaning,
    Development,
    Empowerment,
    Ownership,
    SocialInfluence,
    Scarcity,
    Unpredictability,
    LossAvoidance,
};

inline constexpr std::array<Driver, 8> kAllDrivers = {
    Driver::EpicMeaning,     Driver::Development, Driver::Empowerment,      Driver::Ownership,
    Driver::SocialInfluence, Driver::Scarcity,    Driver::Unpredictability, Driver::LossAvoidance,
};

/// Machine id used in instrument files, e.g. "epic_meaning".
std::string_view driver_id(Driver driver) noexcept;
/// Heading used in reports, e.g. "Epic meaning and calling".
std::string_view driver_title(Driver driver) noexcept;
std::optional<Driver> parse_driver(std::string_view text) noexcept;

enum class Group { Student, Expert };

std::string_view to_string(Group group) noexcept;
std::optional<Group> parse_group(std::string_view text) noexcept;

enum class Interpretation { NotAchieved, PartiallyAchieved, Achieved, FullyAchieved };

std::string_view to_string(Interpretation label) noexcept;  // "Fully Achieved", ...

/// A mean in hundredths: 372 is 3.72. All evaluator arithmetic stays in
/// integers so boundary classification is exact.
struct Centi {
    std::int64_t hundredths = 0;

    std::string str() const;  // "3.72"
    double value() const noexcept { return static_cast<double>(hundredths) / 100.0; }

    friend auto operator<=>(const Centi&, const Centi&) = default;
};

/// numerator / denominator rounded half-up to two decimals; denominator > 0,
/// numerator >= 0.
Centi round_half_up(std::int64_t numerator, std::int64_t denominator);

struct ScaleRange {
    Centi lower;
    Centi upper;
    Interpretation label;
};

class InterpretationScale {
public:
    /// 1.00-1.75 not achieved, 1.76-2.50 partially achieved,
    /// 2.51-3.25 achieved, 3.26-4.00 fully achieved.
    static InterpretationScale standard();

    /// Throws Error{InvalidConfig} unless the ranges are ordered, contiguous
    /// at 0.01 granularity and cover 1.00..4.00.
    explicit InterpretationScale(std::vector<ScaleRange> ranges);

    /// Throws Error{OutOfScale} below 1.00 or above 4.00.
    Interpretation interpret(Centi mean) const;

    const std::vector<ScaleRange>& ranges() const noexcept { return ranges_; }

private:
    std::vector<ScaleRange> ranges_;
};

struct InstrumentItem {
    std::string item_id;
    Driver driver = Driver::EpicMeaning;
    std::string prompt;
};

class Instrument {
public:
    /// Throws Error{InvalidInput}: needs exactly 13 items with unique ids.
    explicit Instrument(std::vector<InstrumentItem> items);

    /// The bundled 13-item questionnaire (assets/survey/instrument.csv).
    static Instrument defaults();

    /// CSV with header `item_id,driver,prompt`. Throws Error{InvalidInput}
    /// carrying every problem as `line N: ...`.
    static Instrument parse_csv(std::string_view text);
    static Instrument load(const std::string& path);

    const std::vector<InstrumentItem>& items() const noexcept { return items_; }
    const InstrumentItem* find(std::string_view item_id) const noexcept;
    /// Drivers that own at least one item, in driver order.
    std::vector<Driver> drivers_with_items() const;

private:
    std::vector<InstrumentItem> items_;
};

inline constexpr std::size_t kInstrumentSize = 13;

struct SurveyRow {
    std::string respondent_id;
    Group group = Group::Student;
    std::string item_id;
    int rating = 1;
};

struct SurveyResponseSet {
    std::vector<SurveyRow> rows;

    /// CSV with header `respondent_id,group,item_id,rating`; ratings 1..4,
    /// item ids must exist in the instrument, one rating per respondent and
    /// item. Throws Error{InvalidInput} listing every bad line.
    static SurveyResponseSet parse_csv(std::string_view text, const Instrument& instrument);
    static SurveyResponseSet load(const std::string& path, const Instrument& instrument);
};

struct ItemStat {
    std::string item_id;
    Group group = Group::Student;
    std::int64_t n = 0;
    Centi mean;
    Interpretation label = Interpretation::NotAchieved;
};

/// Mean rating for one item and group. Throws Error{NoResponses}.
ItemStat item_mean(const SurveyResponseSet& responses, std::string_view item_id, Group group,
                   const InterpretationScale& scale);

struct DriverSummary {
    Driver driver = Driver::EpicMeaning;
    Group group = Group::Student;
    std::size_t item_count = 0;
    Centi mean;
    Interpretation label = Interpretation::NotAchieved;
};

/// Unweighted mean of item means per (driver, group), for every driver that
/// owns instrument items and every group present in `stats`.
/// Throws Error{MissingDriver} if such a driver has no stat for a group.
std::vector<DriverSummary> driver_summary(const std::vector<ItemStat>& stats, const Instrument& instrument,
                                          const InterpretationScale& scale);

struct Report {
    Instrument instrument;
    std::vector<ItemStat> stats;        // instrument order, Student before Expert
    std::vector<DriverSummary> summaries;
};

/// Item stats for every instrument item and every group that answered.
/// Throws Error{NoResponses} if a responding group skipped an item entirely.
Report evaluate(const SurveyResponseSet& responses, const Instrument& instrument, const InterpretationScale& scale);

enum class ReportFormat { Text, Csv, Structured };

std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept;

std::string render_report(const Report& report, ReportFormat format);

}  // namespace pq::eval
