#include "pq/error.hpp"
#include "pq/evaluator.hpp"

#include "test_support.hpp"

#include "json.hpp"

#include <map>
#include <sstream>

using namespace pq;
using namespace pq::eval;

namespace {

const InterpretationScale& scale() {
    static const InterpretationScale s = InterpretationScale::standard();
    return s;
}

SurveyResponseSet ratings(const std::string& item, Group group, const std::vector<int>& values) {
    SurveyResponseSet set;
    int r = 0;
    for (int v : values) set.rows.push_back({"R" + std::to_string(++r), group, item, v});
    return set;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

Report fixture_report() {
    const auto instrument = Instrument::load(test::asset("survey/instrument.csv"));
    const auto responses = SurveyResponseSet::load(test::asset("survey/reference_responses.csv"), instrument);
    return evaluate(responses, instrument, scale());
}

}  // namespace

TEST_CASE("interpretation boundaries") {
    CHECK(scale().interpret({100}) == Interpretation::NotAchieved);
    CHECK(scale().interpret({175}) == Interpretation::NotAchieved);
    CHECK(scale().interpret({176}) == Interpretation::PartiallyAchieved);
    CHECK(scale().interpret({250}) == Interpretation::PartiallyAchieved);
    CHECK(scale().interpret({251}) == Interpretation::Achieved);
    CHECK(scale().interpret({325}) == Interpretation::Achieved);
    CHECK(scale().interpret({326}) == Interpretation::FullyAchieved);
    CHECK(scale().interpret({400}) == Interpretation::FullyAchieved);
    CHECK(scale().interpret({372}) == Interpretation::FullyAchieved);
    CHECK(scale().interpret({250}) == Interpretation::PartiallyAchieved);
    CHECK_PQ_ERROR(scale().interpret({99}), ErrorCode::OutOfScale);
    CHECK_PQ_ERROR(scale().interpret({401}), ErrorCode::OutOfScale);
    CHECK(to_string(Interpretation::FullyAchieved) == "Fully Achieved");
    CHECK(to_string(Interpretation::NotAchieved) == "Not Achieved");
}

TEST_CASE("scale is total and monotone") {
    int previous = -1;
    for (std::int64_t h = 100; h <= 400; ++h) {
        const int label = static_cast<int>(scale().interpret({h}));
        CHECK(label >= previous);
        previous = label;
    }
    CHECK_PQ_ERROR(InterpretationScale({{{100}, {200}, Interpretation::NotAchieved},
                                        {{202}, {400}, Interpretation::Achieved}}),
                   ErrorCode::InvalidConfig);
    CHECK_PQ_ERROR(InterpretationScale({{{100}, {399}, Interpretation::NotAchieved}}), ErrorCode::InvalidConfig);
}

TEST_CASE("half-up rounding in hundredths") {
    CHECK(round_half_up(223, 60).hundredths == 372);
    CHECK(round_half_up(11, 3).hundredths == 367);
    CHECK(round_half_up(7, 2).hundredths == 350);
    CHECK(round_half_up(3685, 1000).hundredths == 369);
    CHECK(round_half_up(36849, 10000).hundredths == 368);
    CHECK(Centi{372}.str() == "3.72");
    CHECK(Centi{400}.str() == "4.00");
    CHECK(Centi{105}.str() == "1.05");
}

TEST_CASE("item_mean examples") {
    std::vector<int> sixty(60, 3);
    std::fill(sixty.begin(), sixty.begin() + 43, 4);  // 43*4 + 17*3 = 223
    const auto a = item_mean(ratings("Q01", Group::Student, sixty), "Q01", Group::Student, scale());
    CHECK(a.mean.hundredths == 372);
    CHECK(a.n == 60);
    CHECK(a.label == Interpretation::FullyAchieved);

    const auto b = item_mean(ratings("Q04", Group::Expert, {4, 4, 3}), "Q04", Group::Expert, scale());
    CHECK(b.mean.str() == "3.67");

    const auto c = item_mean(ratings("Q02", Group::Expert, {4, 4, 4}), "Q02", Group::Expert, scale());
    CHECK(c.mean.str() == "4.00");

    CHECK_PQ_ERROR(item_mean(ratings("Q01", Group::Student, {4}), "Q02", Group::Student, scale()),
                   ErrorCode::NoResponses);
    CHECK_PQ_ERROR(item_mean(ratings("Q01", Group::Student, {4}), "Q01", Group::Expert, scale()),
                   ErrorCode::NoResponses);
}

TEST_CASE("driver summary") {
    const auto instrument = Instrument::defaults();
    std::vector<ItemStat> stats;
    const std::map<std::string, std::int64_t> means = {
        {"Q01", 372}, {"Q02", 370}, {"Q03", 370}, {"Q04", 362}, {"Q05", 367}, {"Q06", 350}, {"Q07", 362},
        {"Q08", 365}, {"Q09", 370}, {"Q10", 367}, {"Q11", 370}, {"Q12", 375}, {"Q13", 367}};
    for (const auto& [id, h] : means) stats.push_back({id, Group::Student, 60, {h}, scale().interpret({h})});

    const auto summaries = driver_summary(stats, instrument, scale());
    std::map<Driver, std::string> by_driver;
    for (const auto& s : summaries) {
        CHECK(s.group == Group::Student);
        by_driver[s.driver] = s.mean.str();
    }
    CHECK(by_driver.at(Driver::EpicMeaning) == "3.71");
    CHECK(by_driver.at(Driver::Empowerment) == "3.59");
    CHECK(by_driver.at(Driver::Ownership) == "3.62");
    CHECK(by_driver.at(Driver::SocialInfluence) == "3.68");
    CHECK(by_driver.count(Driver::Scarcity) == 0);
    CHECK(driver_summary(stats, instrument, scale()).size() == summaries.size());

    // Equal item means aggregate to that mean.
    auto flat = stats;
    for (auto& s : flat) s.mean = {300};
    for (const auto& s : driver_summary(flat, instrument, scale())) CHECK(s.mean.hundredths == 300);

    stats.erase(stats.begin() + 6);  // Q07, the only ownership item
    CHECK_PQ_ERROR(driver_summary(stats, instrument, scale()), ErrorCode::MissingDriver);
}

TEST_CASE("instrument files") {
    const auto bundled = Instrument::load(test::asset("survey/instrument.csv"));
    const auto builtin = Instrument::defaults();
    REQUIRE(bundled.items().size() == kInstrumentSize);
    for (std::size_t i = 0; i < kInstrumentSize; ++i) {
        CHECK(bundled.items()[i].item_id == builtin.items()[i].item_id);
        CHECK(bundled.items()[i].driver == builtin.items()[i].driver);
        CHECK(bundled.items()[i].prompt == builtin.items()[i].prompt);
    }
    CHECK(builtin.find("Q07")->driver == Driver::Ownership);
    CHECK(builtin.drivers_with_items().size() == 7);

    try {
        Instrument::parse_csv("item_id,driver,prompt\nQ01,epic_meaning,a\nQ02,heroism,b\n");
        FAIL("expected InvalidInput");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidInput);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_PQ_ERROR(Instrument::parse_csv("id,driver\n"), ErrorCode::InvalidInput);
}

TEST_CASE("response parsing reports every bad line") {
    const auto instrument = Instrument::defaults();
    const std::string text =
        "respondent_id,group,item_id,rating\n"
        "S1,Student,Q01,4\n"
        "S1,Student,Q01,3\n"
        "S2,Teacher,Q01,4\n"
        "S3,Student,Q99,4\n"
        "S4,Student,Q01,5\n"
        "S5,Student,Q01\n";
    try {
        SurveyResponseSet::parse_csv(text, instrument);
        FAIL("expected InvalidInput");
    } catch (const Error& e) {
        const std::string what = e.what();
        CHECK(e.code() == ErrorCode::InvalidInput);
        for (int line = 3; line <= 7; ++line) CHECK(what.find("line " + std::to_string(line)) != std::string::npos);
        CHECK(what.find("line 2:") == std::string::npos);
    }
    CHECK_PQ_ERROR(SurveyResponseSet::parse_csv("who,what\n", instrument), ErrorCode::InvalidInput);
    CHECK_PQ_ERROR(SurveyResponseSet::load("/nonexistent.csv", instrument), ErrorCode::InvalidInput);
}

TEST_CASE("fixture reproduces the reference item means") {
    const auto report = fixture_report();
    const std::vector<std::string> student = {"3.72", "3.70", "3.70", "3.62", "3.67", "3.50", "3.62",
                                              "3.65", "3.70", "3.67", "3.70", "3.75", "3.67"};
    std::vector<std::string> got;
    for (const auto& s : report.stats) {
        CHECK(s.label == Interpretation::FullyAchieved);
        if (s.group == Group::Student) {
            CHECK(s.n == 60);
            got.push_back(s.mean.str());
        } else {
            CHECK(s.n == 3);
            CHECK(s.mean.str() == (s.item_id == "Q04" ? "3.67" : "4.00"));
        }
    }
    CHECK(got == student);
}

TEST_CASE("report formats agree") {
    const auto report = fixture_report();
    const auto text = render_report(report, ReportFormat::Text);
    CHECK(text == test::read_text(std::string(PQ_TEST_DIR) + "/golden/reference_report.txt"));

    const auto csv = render_report(report, ReportFormat::Csv);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "row,driver,item_id,group,n,mean,interpretation");
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        const auto fields = split_csv_line(line);
        REQUIRE(fields.size() == 7);
        // Every mean in the CSV is printed identically in the text report.
        CHECK(text.find(fields[5]) != std::string::npos);
        ++rows;
    }
    CHECK(rows == report.stats.size() + report.summaries.size());

    const auto structured = nlohmann::json::parse(render_report(report, ReportFormat::Structured));
    CHECK(structured.at("items").size() == report.stats.size());
    CHECK(structured.at("items").at(0).at("mean") == "3.72");

    CHECK(parse_report_format("csv") == ReportFormat::Csv);
    CHECK(parse_report_format("structured") == ReportFormat::Structured);
    CHECK_FALSE(parse_report_format("xml").has_value());
}
