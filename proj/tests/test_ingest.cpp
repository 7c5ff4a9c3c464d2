#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "glucolens/ingest.hpp"
#include "helpers.hpp"

using namespace glucolens;
using namespace testing_helpers;

namespace {

const std::string kFoodHeader(kFoodLogHeader);
const std::string kWorkHeader(kWorkLogHeader);

std::string food_row(const std::string& id, const std::string& date, const std::string& time,
                     const std::string& kind, double calories, double net, double total,
                     double fiber) {
  return fmt::format("{},{},{},{},{},100,3,0,20,800,{},10,{},12,25,{}\n", id, date, time, kind,
                     calories, total, net, fiber);
}

}  // namespace

TEST_CASE("parse_cgm keeps samples in time order") {
  auto in = stream("timestamp,glucose_mgdl\n2024-03-04 10:00,100\n2024-03-04 10:15,110\n");
  const CgmTrace t = parse_cgm(in, "P1");
  REQUIRE(t.samples().size() == 2);
  CHECK(t.samples()[0].glucose == 100.0);
  CHECK(t.samples()[1].glucose == 110.0);
  CHECK(t.participant_id() == "P1");

  auto shuffled = stream("timestamp,glucose_mgdl\n2024-03-04 10:15,110\n2024-03-04 10:00,100\n");
  const CgmTrace u = parse_cgm(shuffled, "P1");
  CHECK(u.samples()[0].timestamp < u.samples()[1].timestamp);
  CHECK(u.samples()[0].glucose == 100.0);
}

TEST_CASE("parse_cgm rejects out-of-range glucose and names the line") {
  auto in = stream("timestamp,glucose_mgdl\n2024-03-04 10:00,100\n2024-03-04 10:15,900\n");
  const std::string msg = message_of([&] { parse_cgm(in, "P1"); });
  CHECK(msg.find("OutOfRange") != std::string::npos);
  CHECK(msg.find("line 3") != std::string::npos);

  auto low = stream("timestamp,glucose_mgdl\n2024-03-04 10:00,19.9\n");
  CHECK(error_of([&] { parse_cgm(low, "P1"); }) == ErrorCode::OutOfRange);
  auto edge = stream("timestamp,glucose_mgdl\n2024-03-04 10:00,20\n2024-03-04 10:15,600\n");
  CHECK(parse_cgm(edge, "P1").samples().size() == 2);
}

TEST_CASE("parse_cgm error paths") {
  auto empty = stream("timestamp,glucose_mgdl\n");
  CHECK(error_of([&] { parse_cgm(empty, "P1"); }) == ErrorCode::EmptyTrace);
  auto bad = stream("timestamp,glucose_mgdl\n2024-03-04 10:00,abc\n");
  const std::string msg = message_of([&] { parse_cgm(bad, "P1"); });
  CHECK(msg.find("MalformedRow") != std::string::npos);
  CHECK(msg.find("line 2") != std::string::npos);
  auto header = stream("time,glucose\n");
  CHECK(error_of([&] { parse_cgm(header, "P1"); }) == ErrorCode::MalformedRow);
  auto ts = stream("timestamp,glucose_mgdl\n2024-13-04 10:00,100\n");
  CHECK(error_of([&] { parse_cgm(ts, "P1"); }) == ErrorCode::MalformedRow);
}

TEST_CASE("parse_cgm collapses duplicate timestamps keeping the first") {
  auto in = stream(
      "timestamp,glucose_mgdl\n2024-03-04 10:00,100\n2024-03-04 10:00,150\n2024-03-04 10:15,110\n");
  const CgmTrace t = parse_cgm(in, "P1");
  REQUIRE(t.samples().size() == 2);
  CHECK(t.samples()[0].glucose == 100.0);
}

TEST_CASE("parse_activity_events") {
  SUBCASE("single sedentary event") {
    auto in = stream("start,duration_s,kind\n2024-03-04 09:00:00,3600,sedentary\n");
    const auto log = parse_activity_events(in, "P1");
    REQUIRE(log.events().size() == 1);
    CHECK(log.events()[0].kind == ActivityKind::Sedentary);
    CHECK(log.events()[0].duration_s == 3600.0);
  }
  SUBCASE("kind names are case-insensitive") {
    auto in = stream("start,duration_s,kind\n2024-03-04 09:00,60,Seated Transport\n"
                     "2024-03-04 09:01,60,PRIMARY_LYING\n");
    const auto log = parse_activity_events(in, "P1");
    CHECK(log.events()[0].kind == ActivityKind::SeatedTransport);
    CHECK(log.events()[1].kind == ActivityKind::PrimaryLying);
  }
  SUBCASE("unknown kind") {
    auto in = stream("start,duration_s,kind\n2024-03-04 09:00,60,jumping\n");
    CHECK(error_of([&] { parse_activity_events(in, "P1"); }) == ErrorCode::UnknownActivityKind);
  }
  SUBCASE("ten-minute overlap is rejected") {
    auto in = stream("start,duration_s,kind\n2024-03-04 09:00,1800,standing\n"
                     "2024-03-04 09:20,600,stepping\n");
    CHECK(error_of([&] { parse_activity_events(in, "P1"); }) == ErrorCode::OverlappingEvents);
  }
  SUBCASE("overlap within one second is tolerated") {
    auto in = stream("start,duration_s,kind\n2024-03-04 09:00:00,60.8,standing\n"
                     "2024-03-04 09:01:00,60,stepping\n");
    CHECK(parse_activity_events(in, "P1").events().size() == 2);
  }
  SUBCASE("unsorted input is sorted") {
    auto in = stream("start,duration_s,kind\n2024-03-04 10:00,60,standing\n"
                     "2024-03-04 09:00,60,stepping\n");
    const auto log = parse_activity_events(in, "P1");
    CHECK(log.events()[0].kind == ActivityKind::Stepping);
  }
}

TEST_CASE("parse_food_log") {
  SUBCASE("lunch row") {
    auto in = stream(kFoodHeader + "\n" +
                     food_row("P1", "2024-03-04", "12:30", "lunch", 780, 60, 61, 1));
    const auto meals = parse_food_log(in);
    REQUIRE(meals.size() == 1);
    CHECK(meals[0].macros.calories == 780.0);
    CHECK(meals[0].macros.fiber == 1.0);
    CHECK(meals[0].meal_kind == MealKind::Lunch);
    CHECK(meals[0].meal_time == at(12, 30));
  }
  SUBCASE("all-zero macros are a valid fasting placeholder") {
    auto in = stream(kFoodHeader + "\nP1,2024-03-04,12:00,lunch,0,0,0,0,0,0,0,0,0,0,0,0\n");
    CHECK(parse_food_log(in)[0].macros == MacroProfile{});
  }
  SUBCASE("net carbs above total carbs") {
    auto in = stream(kFoodHeader + "\n" +
                     food_row("P1", "2024-03-04", "12:30", "lunch", 780, 60, 50, 1));
    CHECK(error_of([&] { parse_food_log(in); }) == ErrorCode::NetCarbExceedsTotal);
  }
  SUBCASE("negative macro") {
    auto in = stream(kFoodHeader + "\nP1,2024-03-04,12:00,lunch,500,0,0,0,0,-3,0,0,0,0,0,0\n");
    CHECK(error_of([&] { parse_food_log(in); }) == ErrorCode::NegativeMacro);
  }
}

TEST_CASE("parse_work_log") {
  SUBCASE("regular day") {
    auto in = stream(kWorkHeader + "\nP1,2024-03-04,9:00,17:00,0,60,30,10,baseline\n");
    const auto days = parse_work_log(in);
    REQUIRE(days.size() == 1);
    CHECK(days[0].work_start == 540);
    CHECK(days[0].work_end == 1020);
    CHECK_FALSE(days[0].work_from_home);
    CHECK(days[0].phase == Phase::Baseline);
  }
  SUBCASE("percentages over 100") {
    auto in = stream(kWorkHeader + "\nP1,2024-03-04,9:00,17:00,0,50,40,30,baseline\n");
    CHECK(error_of([&] { parse_work_log(in); }) == ErrorCode::PercentSumExceeded);
  }
  SUBCASE("rounding slack of one point") {
    auto in = stream(kWorkHeader + "\nP1,2024-03-04,9:00,17:00,1,34,34,33,condition2\n");
    CHECK(parse_work_log(in)[0].work_from_home);
  }
  SUBCASE("start after end") {
    auto in = stream(kWorkHeader + "\nP1,2024-03-04,18:00,9:00,0,60,30,10,baseline\n");
    CHECK(error_of([&] { parse_work_log(in); }) == ErrorCode::StartAfterEnd);
  }
}

namespace {

CgmTrace two_day_trace(const std::string& id) {
  std::vector<CgmSample> s;
  for (int m = 0; m < 2 * 1440; m += 15) {
    s.push_back({DateTime::at_minute_of_day(day0(), m), 100.0});
  }
  return CgmTrace(id, s);
}

}  // namespace

TEST_CASE("assemble_participant") {
  const CgmTrace cgm = two_day_trace("P1");
  const ActivityEventLog log("P1", {{at(9, 0), 600, ActivityKind::Standing}});
  std::vector<MealRecord> meals{MealRecord("P1", at(12, 0), MealKind::Lunch, {}),
                                MealRecord("P1", at(12, 0, 1), MealKind::Lunch, {})};
  std::vector<WorkdayRecord> work{
      WorkdayRecord("P1", day0(), 540, 1020, false, 60, 30, 10, Phase::Condition1)};

  SUBCASE("consistent inputs, BMI 32.8") {
    const auto p = assemble_participant("P1", cgm, log, meals, work, 32.8);
    CHECK(p.bmi() == 32.8);
    REQUIRE(p.meals().size() == 2);
    CHECK(p.meals()[0].phase == Phase::Condition1);
    CHECK_FALSE(p.meal_flagged()[0]);
    CHECK(p.meal_flagged()[1]);  // no workday on day 1
  }
  SUBCASE("meal from another participant") {
    meals.push_back(MealRecord("P2", at(12, 0), MealKind::Lunch, {}));
    CHECK(error_of([&] { assemble_participant("P1", cgm, log, meals, work, 32.8); }) ==
          ErrorCode::IdMismatch);
  }
  SUBCASE("BMI bounds") {
    CHECK(error_of([&] { assemble_participant("P1", cgm, log, meals, work, 9.0); }) ==
          ErrorCode::BmiOutOfRange);
    CHECK(error_of([&] { assemble_participant("P1", cgm, log, meals, work, 81.0); }) ==
          ErrorCode::BmiOutOfRange);
  }
  SUBCASE("meal outside the study window") {
    meals.push_back(MealRecord("P1", at(12, 0, 5), MealKind::Lunch, {}));
    CHECK(error_of([&] { assemble_participant("P1", cgm, log, meals, work, 32.8); }) ==
          ErrorCode::InvalidRecord);
  }
}

TEST_CASE("type invariants are enforced at construction") {
  CHECK(error_of([] { CgmTrace("P1", {{at(10, 0), 100}, {at(10, 0), 100}}); }) ==
        ErrorCode::InvalidRecord);
  CHECK(error_of([] { ActivityEventLog("P1", {{at(10, 0), -1, ActivityKind::Standing}}); }) ==
        ErrorCode::InvalidRecord);
  MacroProfile m;
  m.calories = 100;
  m.calories_from_fat = 200;
  CHECK(error_of([&] { MealRecord("P1", at(12, 0), MealKind::Lunch, m); }) ==
        ErrorCode::InvalidRecord);
}

// Property: parse(write(parse(x))) == parse(x) over random valid fixtures, and
// shuffling input rows does not change the parsed output.
TEST_CASE("round trip and order insensitivity on random fixtures") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    // CGM
    std::vector<std::string> cgm_rows;
    for (int i = 0; i < 50; ++i) {
      cgm_rows.push_back(fmt::format("{},{}", at(0, 0).plus_minutes(15.0 * i).to_string(),
                                     std::round((40 + 300 * u(rng)) * 10) / 10));
    }
    std::shuffle(cgm_rows.begin(), cgm_rows.end(), rng);
    std::string text = "timestamp,glucose_mgdl\n";
    for (const auto& r : cgm_rows) text += r + "\n";
    auto in1 = stream(text);
    const CgmTrace a = parse_cgm(in1, "P1");
    std::ostringstream out;
    write_cgm(out, a);
    auto in2 = stream(out.str());
    const CgmTrace b = parse_cgm(in2, "P1");
    REQUIRE(a.samples().size() == b.samples().size());
    for (std::size_t i = 0; i < a.samples().size(); ++i) {
      CHECK(a.samples()[i].timestamp == b.samples()[i].timestamp);
      CHECK(a.samples()[i].glucose == b.samples()[i].glucose);
    }
    std::sort(cgm_rows.begin(), cgm_rows.end());
    std::string sorted_text = "timestamp,glucose_mgdl\n";
    for (const auto& r : cgm_rows) sorted_text += r + "\n";
    auto in3 = stream(sorted_text);
    std::ostringstream out2;
    write_cgm(out2, parse_cgm(in3, "P1"));
    CHECK(out.str() == out2.str());

    // Activity events
    std::vector<ActivityEvent> events;
    DateTime t = at(0, 0);
    for (int i = 0; i < 30; ++i) {
      const double dur = std::floor(1 + 1000 * u(rng));
      events.push_back({t, dur, static_cast<ActivityKind>(static_cast<int>(7 * u(rng)) % 7)});
      t = t.plus_seconds(static_cast<std::int64_t>(dur) + static_cast<std::int64_t>(5 * u(rng)));
    }
    const ActivityEventLog log("P1", events);
    std::ostringstream aout;
    write_activity_events(aout, log);
    auto ain = stream(aout.str());
    const auto log2 = parse_activity_events(ain, "P1");
    REQUIRE(log2.events().size() == events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
      CHECK(log2.events()[i].start == events[i].start);
      CHECK(log2.events()[i].duration_s == events[i].duration_s);
      CHECK(log2.events()[i].kind == events[i].kind);
    }

    // Food and work logs
    std::vector<MealRecord> meals;
    std::vector<WorkdayRecord> work;
    for (int d = 0; d < 5; ++d) {
      MacroProfile m;
      m.total_carbs = std::round(100 * u(rng) * 100) / 100;
      m.net_carbs = m.total_carbs * 0.8;
      m.fiber = m.total_carbs - m.net_carbs;
      m.fat = 30 * u(rng);
      m.protein = 40 * u(rng);
      m.calories = 4 * m.total_carbs + 9 * m.fat + 4 * m.protein;
      m.calories_from_fat = 9 * m.fat;
      m.sodium = 1000 * u(rng);
      meals.emplace_back("P1", at(11, 30 + d, d), MealKind::Lunch, m);
      const double sit = std::round(80 * u(rng));
      work.emplace_back("P1", day0().plus_days(d), 480 + d, 1000, d % 2 == 0, sit,
                        std::round((100 - sit) * u(rng)), 0.0, Phase::Condition2);
    }
    std::ostringstream fout, wout;
    write_food_log(fout, meals);
    write_work_log(wout, work);
    auto fin = stream(fout.str());
    auto win = stream(wout.str());
    CHECK(parse_food_log(fin) == meals);
    CHECK(parse_work_log(win) == work);
  }
}

TEST_CASE("cohort directory round trip is byte-stable") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "glucolens_test_cohort";
  const CgmTrace cgm = two_day_trace("P1");
  const ActivityEventLog log("P1", {{at(9, 0), 600, ActivityKind::Standing}});
  std::vector<MealRecord> meals{MealRecord("P1", at(12, 0), MealKind::Lunch, {})};
  std::vector<WorkdayRecord> work{
      WorkdayRecord("P1", day0(), 540, 1020, false, 60, 30, 10, Phase::Baseline)};
  const std::vector<ParticipantData> cohort{
      assemble_participant("P1", cgm, log, meals, work, 30.5)};
  write_cohort(dir, cohort);
  const auto back = read_cohort(dir);
  REQUIRE(back.size() == 1);
  CHECK(back[0].bmi() == 30.5);
  CHECK(back[0].cgm().samples().size() == cgm.samples().size());

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string first = slurp(dir / "food_log.csv") + slurp(dir / "cgm" / "P1.csv");
  write_cohort(dir, back);
  CHECK(slurp(dir / "food_log.csv") + slurp(dir / "cgm" / "P1.csv") == first);

  fs::remove(dir / "cgm" / "P1.csv");
  const std::string msg = message_of([&] { read_cohort(dir); });
  CHECK(msg.find("P1.csv") != std::string::npos);
  fs::remove_all(dir);
}
