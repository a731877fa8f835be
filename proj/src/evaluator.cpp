#include "pq/evaluator.hpp"

#include "pq/error.hpp"
#include "text_util.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace pq::eval {

namespace {

// Same content as assets/survey/instrument.csv.
constexpr std::string_view kDefaultInstrument =
    "item_id,driver,prompt\n"
    "Q01,epic_meaning,I was able to answer the questions posed in the game until I reached the finish tile.\n"
    "Q02,epic_meaning,I was able to use a free avatar in playing the game.\n"
    "Q03,development,\"I was able to gain points, scores, rewards and able to check user profile.\"\n"
    "Q04,development,I was able to save my progress every time.\n"
    "Q05,empowerment,I was able to earn more points and rewards through continues playing.\n"
    "Q06,empowerment,I was able to get an extra reward for every completion of a daily quest.\n"
    "Q07,ownership,I was able to exchange my points into a new avatar design at the game shop.\n"
    "Q08,social_influence,I was able to solve the questions through the assistance of the game tutorial.\n"
    "Q09,social_influence,I was reminded of the gameplay of the snake and ladder while learning.\n"
    "Q10,unpredictability,I was able to re-play the game time after time depending upon the available energy.\n"
    "Q11,unpredictability,\"I was able to obtain the most expensive avatar, enabling me to keep playing and earn "
    "more rewards.\"\n"
    "Q12,loss_avoidance,I was able to think about the questions I need to answer every time I roll the dice.\n"
    "Q13,loss_avoidance,\"I was able to ensure that my answers to each question are correct; thus, able to avoid "
    "losing a lifeline.\"\n";

struct DriverName {
    Driver driver;
    std::string_view id;
    std::string_view title;
};

constexpr std::array<DriverName, 8> kDriverNames = {{
    {Driver::EpicMeaning, "epic_meaning", "Epic meaning and calling"},
    {Driver::Development, "development", "Development and accomplishment"},
    {Driver::Empowerment, "empowerment", "Empowerment of creativity and feedback"},
    {Driver::Ownership, "ownership", "Ownership and possession"},
    {Driver::SocialInfluence, "social_influence", "Social influence and relatedness"},
    {Driver::Scarcity, "scarcity", "Scarcity and impatience"},
    {Driver::Unpredictability, "unpredictability", "Unpredictability and curiosity"},
    {Driver::LossAvoidance, "loss_avoidance", "Loss and avoidance"},
}};

constexpr std::array<Group, 2> kGroups = {Group::Student, Group::Expert};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidInput, "cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

[[noreturn]] void invalid(const std::vector<std::string>& problems) {
    std::string message;
    for (const auto& p : problems) {
        if (!message.empty()) message += '\n';
        message += p;
    }
    throw Error(ErrorCode::InvalidInput, message);
}

std::string line_tag(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

}  // namespace

std::string_view driver_id(Driver driver) noexcept {
    return kDriverNames[static_cast<std::size_t>(driver)].id;
}

std::string_view driver_title(Driver driver) noexcept {
    return kDriverNames[static_cast<std::size_t>(driver)].title;
}

std::optional<Driver> parse_driver(std::string_view text) noexcept {
    const std::string lowered = detail::to_lower(detail::trim(text));
    for (const auto& entry : kDriverNames) {
        if (lowered == entry.id || lowered == detail::to_lower(entry.title)) return entry.driver;
    }
    return std::nullopt;
}

std::string_view to_string(Group group) noexcept {
    return group == Group::Student ? "Student" : "Expert";
}

std::optional<Group> parse_group(std::string_view text) noexcept {
    const std::string lowered = detail::to_lower(detail::trim(text));
    if (lowered == "student") return Group::Student;
    if (lowered == "expert") return Group::Expert;
    return std::nullopt;
}

std::string_view to_string(Interpretation label) noexcept {
    switch (label) {
        case Interpretation::NotAchieved: return "Not Achieved";
        case Interpretation::PartiallyAchieved: return "Partially Achieved";
        case Interpretation::Achieved: return "Achieved";
        case Interpretation::FullyAchieved: return "Fully Achieved";
    }
    return "Not Achieved";
}

std::string Centi::str() const {
    char buffer[32];
    const std::int64_t magnitude = hundredths < 0 ? -hundredths : hundredths;
    std::snprintf(buffer, sizeof buffer, "%s%lld.%02lld", hundredths < 0 ? "-" : "",
                  static_cast<long long>(magnitude / 100), static_cast<long long>(magnitude % 100));
    return buffer;
}

Centi round_half_up(std::int64_t numerator, std::int64_t denominator) {
    if (denominator <= 0 || numerator < 0) throw Error(ErrorCode::Internal, "round_half_up needs n >= 0, d > 0");
    // floor(100 * n / d + 1/2) == floor((200 n + d) / (2 d))
    return Centi{(200 * numerator + denominator) / (2 * denominator)};
}

InterpretationScale InterpretationScale::standard() {
    return InterpretationScale({
        {Centi{100}, Centi{175}, Interpretation::NotAchieved},
        {Centi{176}, Centi{250}, Interpretation::PartiallyAchieved},
        {Centi{251}, Centi{325}, Interpretation::Achieved},
        {Centi{326}, Centi{400}, Interpretation::FullyAchieved},
    });
}

InterpretationScale::InterpretationScale(std::vector<ScaleRange> ranges) : ranges_(std::move(ranges)) {
    if (ranges_.empty()) throw Error(ErrorCode::InvalidConfig, "scale has no ranges");
    if (ranges_.front().lower != Centi{100} || ranges_.back().upper != Centi{400}) {
        throw Error(ErrorCode::InvalidConfig, "scale must cover 1.00..4.00");
    }
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
        if (ranges_[i].lower > ranges_[i].upper) throw Error(ErrorCode::InvalidConfig, "scale range is empty");
        if (i > 0 && ranges_[i].lower.hundredths != ranges_[i - 1].upper.hundredths + 1) {
            throw Error(ErrorCode::InvalidConfig, "scale ranges must be contiguous at 0.01 granularity");
        }
    }
}

Interpretation InterpretationScale::interpret(Centi mean) const {
    for (const auto& range : ranges_) {
        if (mean >= range.lower && mean <= range.upper) return range.label;
    }
    throw Error(ErrorCode::OutOfScale, "mean " + mean.str() + " is outside 1.00..4.00");
}

Instrument::Instrument(std::vector<InstrumentItem> items) : items_(std::move(items)) {
    std::vector<std::string> problems;
    if (items_.size() != kInstrumentSize) {
        problems.push_back("instrument needs exactly " + std::to_string(kInstrumentSize) + " items, got " +
                           std::to_string(items_.size()));
    }
    std::set<std::string> ids;
    for (const auto& item : items_) {
        if (item.item_id.empty()) problems.push_back("instrument item with empty id");
        else if (!ids.insert(item.item_id).second) problems.push_back("duplicate instrument item " + item.item_id);
    }
    if (!problems.empty()) invalid(problems);
}

Instrument Instrument::defaults() { return parse_csv(kDefaultInstrument); }

Instrument Instrument::parse_csv(std::string_view text) {
    std::vector<InstrumentItem> items;
    std::vector<std::string> problems;
    std::vector<std::string> fields;
    bool header_seen = false;
    std::size_t line_no = 0;
    for (const auto& line : detail::split_lines(text)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        if (!detail::split_csv_record(line, fields)) {
            problems.push_back(line_tag(line_no) + "unterminated quote");
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (fields != std::vector<std::string>{"item_id", "driver", "prompt"}) {
                problems.push_back(line_tag(line_no) + "expected header item_id,driver,prompt");
            }
            continue;
        }
        if (fields.size() != 3) {
            problems.push_back(line_tag(line_no) + "expected 3 fields, got " + std::to_string(fields.size()));
            continue;
        }
        const auto driver = parse_driver(fields[1]);
        if (!driver) {
            problems.push_back(line_tag(line_no) + "unknown driver " + fields[1]);
            continue;
        }
        items.push_back({fields[0], *driver, fields[2]});
    }
    if (!header_seen) problems.push_back("instrument file is empty");
    if (!problems.empty()) invalid(problems);
    return Instrument(std::move(items));
}

Instrument Instrument::load(const std::string& path) { return parse_csv(read_file(path)); }

const InstrumentItem* Instrument::find(std::string_view item_id) const noexcept {
    const auto it = std::find_if(items_.begin(), items_.end(), [&](const auto& i) { return i.item_id == item_id; });
    return it == items_.end() ? nullptr : &*it;
}

std::vector<Driver> Instrument::drivers_with_items() const {
    std::vector<Driver> out;
    for (const Driver d : kAllDrivers) {
        if (std::any_of(items_.begin(), items_.end(), [d](const auto& i) { return i.driver == d; })) out.push_back(d);
    }
    return out;
}

SurveyResponseSet SurveyResponseSet::parse_csv(std::string_view text, const Instrument& instrument) {
    SurveyResponseSet set;
    std::vector<std::string> problems;
    std::vector<std::string> fields;
    std::set<std::pair<std::string, std::string>> seen;
    bool header_seen = false;
    std::size_t line_no = 0;
    for (const auto& line : detail::split_lines(text)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        if (!detail::split_csv_record(line, fields)) {
            problems.push_back(line_tag(line_no) + "unterminated quote");
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (fields != std::vector<std::string>{"respondent_id", "group", "item_id", "rating"}) {
                problems.push_back(line_tag(line_no) + "expected header respondent_id,group,item_id,rating");
            }
            continue;
        }
        if (fields.size() != 4) {
            problems.push_back(line_tag(line_no) + "expected 4 fields, got " + std::to_string(fields.size()));
            continue;
        }
        SurveyRow row;
        row.respondent_id = fields[0];
        row.item_id = fields[2];
        bool ok = true;
        if (row.respondent_id.empty()) {
            problems.push_back(line_tag(line_no) + "empty respondent_id");
            ok = false;
        }
        const auto group = parse_group(fields[1]);
        if (!group) {
            problems.push_back(line_tag(line_no) + "unknown group " + fields[1]);
            ok = false;
        }
        if (instrument.find(row.item_id) == nullptr) {
            problems.push_back(line_tag(line_no) + "unknown item " + row.item_id);
            ok = false;
        }
        if (fields[3].size() != 1 || fields[3][0] < '1' || fields[3][0] > '4') {
            problems.push_back(line_tag(line_no) + "rating must be an integer 1..4, got " + fields[3]);
            ok = false;
        }
        if (!ok) continue;
        row.group = *group;
        row.rating = fields[3][0] - '0';
        if (!seen.emplace(row.respondent_id, row.item_id).second) {
            problems.push_back(line_tag(line_no) + "duplicate rating by " + row.respondent_id + " for " + row.item_id);
            continue;
        }
        set.rows.push_back(std::move(row));
    }
    if (!header_seen) problems.push_back("response file is empty");
    if (!problems.empty()) invalid(problems);
    return set;
}

SurveyResponseSet SurveyResponseSet::load(const std::string& path, const Instrument& instrument) {
    return parse_csv(read_file(path), instrument);
}

ItemStat item_mean(const SurveyResponseSet& responses, std::string_view item_id, Group group,
                   const InterpretationScale& scale) {
    std::int64_t n = 0;
    std::int64_t sum = 0;
    for (const auto& row : responses.rows) {
        if (row.item_id == item_id && row.group == group) {
            ++n;
            sum += row.rating;
        }
    }
    if (n == 0) {
        throw Error(ErrorCode::NoResponses,
                    "no " + std::string(to_string(group)) + " responses for item " + std::string(item_id));
    }
    ItemStat stat;
    stat.item_id = std::string(item_id);
    stat.group = group;
    stat.n = n;
    stat.mean = round_half_up(sum, n);
    stat.label = scale.interpret(stat.mean);
    return stat;
}

std::vector<DriverSummary> driver_summary(const std::vector<ItemStat>& stats, const Instrument& instrument,
                                          const InterpretationScale& scale) {
    std::vector<DriverSummary> out;
    for (const Group group : kGroups) {
        const bool present = std::any_of(stats.begin(), stats.end(), [group](const auto& s) { return s.group == group; });
        if (!present) continue;
        for (const Driver driver : instrument.drivers_with_items()) {
            std::int64_t sum = 0;
            std::size_t count = 0;
            for (const auto& stat : stats) {
                const InstrumentItem* item = instrument.find(stat.item_id);
                if (stat.group == group && item != nullptr && item->driver == driver) {
                    sum += stat.mean.hundredths;
                    ++count;
                }
            }
            if (count == 0) {
                throw Error(ErrorCode::MissingDriver, "no " + std::string(to_string(group)) + " item stats for driver " +
                                                          std::string(driver_id(driver)));
            }
            DriverSummary summary;
            summary.driver = driver;
            summary.group = group;
            summary.item_count = count;
            // Mean of means already in hundredths: round(sum / count) at unit precision.
            summary.mean = Centi{(2 * sum + static_cast<std::int64_t>(count)) / (2 * static_cast<std::int64_t>(count))};
            summary.label = scale.interpret(summary.mean);
            out.push_back(summary);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const DriverSummary& a, const DriverSummary& b) {
        return std::pair(a.driver, a.group) < std::pair(b.driver, b.group);
    });
    return out;
}

Report evaluate(const SurveyResponseSet& responses, const Instrument& instrument, const InterpretationScale& scale) {
    std::vector<Group> groups;
    for (const Group g : kGroups) {
        if (std::any_of(responses.rows.begin(), responses.rows.end(), [g](const auto& r) { return r.group == g; })) {
            groups.push_back(g);
        }
    }
    if (groups.empty()) throw Error(ErrorCode::NoResponses, "response set is empty");
    Report report{instrument, {}, {}};
    for (const auto& item : instrument.items()) {
        for (const Group g : groups) report.stats.push_back(item_mean(responses, item.item_id, g, scale));
    }
    report.summaries = driver_summary(report.stats, instrument, scale);
    return report;
}

std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept {
    const std::string lowered = detail::to_lower(text);
    if (lowered == "text") return ReportFormat::Text;
    if (lowered == "csv") return ReportFormat::Csv;
    if (lowered == "structured" || lowered == "json") return ReportFormat::Structured;
    return std::nullopt;
}

namespace {

std::vector<const ItemStat*> stats_for(const Report& report, std::string_view item_id) {
    std::vector<const ItemStat*> out;
    for (const auto& s : report.stats) {
        if (s.item_id == item_id) out.push_back(&s);
    }
    return out;
}

std::vector<const DriverSummary*> summaries_for(const Report& report, Driver driver) {
    std::vector<const DriverSummary*> out;
    for (const auto& s : report.summaries) {
        if (s.driver == driver) out.push_back(&s);
    }
    return out;
}

std::string render_text(const Report& report) {
    std::ostringstream out;
    out << "Evaluation summary\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %-8s %5s %6s  %s\n", "item", "group", "n", "mean", "interpretation");
    out << line;
    for (const Driver driver : report.instrument.drivers_with_items()) {
        out << '\n' << driver_title(driver) << '\n';
        for (const auto& item : report.instrument.items()) {
            if (item.driver != driver) continue;
            out << "  " << item.item_id << "  " << item.prompt << '\n';
            for (const ItemStat* s : stats_for(report, item.item_id)) {
                std::snprintf(line, sizeof line, "%-8s %-8s %5lld %6s  %s\n", s->item_id.c_str(),
                              std::string(to_string(s->group)).c_str(), static_cast<long long>(s->n),
                              s->mean.str().c_str(), std::string(to_string(s->label)).c_str());
                out << line;
            }
        }
        for (const DriverSummary* s : summaries_for(report, driver)) {
            std::snprintf(line, sizeof line, "%-8s %-8s %5s %6s  %s\n", "driver",
                          std::string(to_string(s->group)).c_str(), "", s->mean.str().c_str(),
                          std::string(to_string(s->label)).c_str());
            out << line;
        }
    }
    return out.str();
}

std::string render_csv(const Report& report) {
    std::ostringstream out;
    out << "row,driver,item_id,group,n,mean,interpretation\n";
    for (const Driver driver : report.instrument.drivers_with_items()) {
        for (const auto& item : report.instrument.items()) {
            if (item.driver != driver) continue;
            for (const ItemStat* s : stats_for(report, item.item_id)) {
                out << "item," << driver_id(driver) << ',' << detail::csv_field(s->item_id) << ','
                    << to_string(s->group) << ',' << s->n << ',' << s->mean.str() << ',' << to_string(s->label) << '\n';
            }
        }
        for (const DriverSummary* s : summaries_for(report, driver)) {
            out << "driver," << driver_id(driver) << ",," << to_string(s->group) << ",," << s->mean.str() << ','
                << to_string(s->label) << '\n';
        }
    }
    return out.str();
}

std::string render_structured(const Report& report) {
    using nlohmann::ordered_json;
    ordered_json items = ordered_json::array();
    for (const auto& item : report.instrument.items()) {
        for (const ItemStat* s : stats_for(report, item.item_id)) {
            items.push_back({{"item_id", s->item_id},
                             {"driver", driver_id(item.driver)},
                             {"prompt", item.prompt},
                             {"group", to_string(s->group)},
                             {"n", s->n},
                             {"mean", s->mean.str()},
                             {"interpretation", to_string(s->label)}});
        }
    }
    ordered_json drivers = ordered_json::array();
    for (const auto& s : report.summaries) {
        drivers.push_back({{"driver", driver_id(s.driver)},
                           {"title", driver_title(s.driver)},
                           {"group", to_string(s.group)},
                           {"items", s.item_count},
                           {"mean", s.mean.str()},
                           {"interpretation", to_string(s.label)}});
    }
    ordered_json doc{{"report", "evaluation"}, {"items", std::move(items)}, {"drivers", std::move(drivers)}};
    return doc.dump(2) + "\n";
}

}  // namespace

std::string render_report(const Report& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::Text: return render_text(report);
        case ReportFormat::Csv: return render_csv(report);
        case ReportFormat::Structured: return render_structured(report);
    }
    return render_text(report);
}

}  // namespace pq::eval
