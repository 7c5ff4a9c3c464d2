#include "glucolens/time.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "glucolens/error.hpp"

namespace glucolens {
namespace {

// Civil-calendar conversions (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  year = static_cast<int>(y + (month <= 2));
}

int days_in_month(int year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  return month == 2 && leap ? 29 : kDays[month - 1];
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    fail(ErrorCode::MalformedRow, fmt::format("bad {} '{}'", what, text));
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Date::Date(int year, int month, int day) : year_(year), month_(month), day_(day) {
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
    fail(ErrorCode::MalformedRow, fmt::format("invalid date {}-{}-{}", year, month, day));
  }
}

Date Date::from_days(std::int64_t days_since_epoch) {
  int y = 0, m = 0, d = 0;
  civil_from_days(days_since_epoch, y, m, d);
  return Date(y, m, d);
}

Date Date::parse(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    fail(ErrorCode::MalformedRow, fmt::format("bad date '{}'", text));
  }
  return Date(parse_int(text.substr(0, 4), "year"), parse_int(text.substr(5, 2), "month"),
              parse_int(text.substr(8, 2), "day"));
}

std::int64_t Date::days_since_epoch() const {
  return days_from_civil(year_, static_cast<unsigned>(month_), static_cast<unsigned>(day_));
}

int Date::day_of_week() const {
  // 1970-01-01 was a Thursday (index 3).
  const std::int64_t d = days_since_epoch();
  return static_cast<int>(((d % 7) + 7 + 3) % 7);
}

std::string Date::to_string() const { return fmt::format("{:04d}-{:02d}-{:02d}", year_, month_, day_); }

DateTime::DateTime(Date date, int hour, int minute, int second)
    : seconds_(date.days_since_epoch() * 86400 + hour * 3600 + minute * 60 + second) {}

DateTime DateTime::at_minute_of_day(Date date, double minutes) {
  return DateTime(date.days_since_epoch() * 86400 + std::llround(minutes * 60.0));
}

DateTime DateTime::parse(std::string_view text) {
  text = trim(text);
  if (text.size() < 16 || (text[10] != ' ' && text[10] != 'T') || text[13] != ':') {
    fail(ErrorCode::MalformedRow, fmt::format("bad timestamp '{}'", text));
  }
  const Date date = Date::parse(text.substr(0, 10));
  const int hour = parse_int(text.substr(11, 2), "hour");
  const int minute = parse_int(text.substr(14, 2), "minute");
  int second = 0;
  if (text.size() == 19 && text[16] == ':') {
    second = parse_int(text.substr(17, 2), "second");
  } else if (text.size() != 16) {
    fail(ErrorCode::MalformedRow, fmt::format("bad timestamp '{}'", text));
  }
  if (hour > 23 || minute > 59 || second > 59 || hour < 0 || minute < 0 || second < 0) {
    fail(ErrorCode::MalformedRow, fmt::format("bad time of day '{}'", text));
  }
  return DateTime(date, hour, minute, second);
}

Date DateTime::date() const {
  const std::int64_t days = seconds_ >= 0 ? seconds_ / 86400 : (seconds_ - 86399) / 86400;
  return Date::from_days(days);
}

std::int64_t DateTime::seconds_of_day() const { return ((seconds_ % 86400) + 86400) % 86400; }

DateTime DateTime::plus_minutes(double m) const {
  return DateTime(seconds_ + std::llround(m * 60.0));
}

std::string DateTime::to_string() const {
  const std::int64_t sod = seconds_of_day();
  const auto h = sod / 3600, m = (sod / 60) % 60, s = sod % 60;
  if (s == 0) return fmt::format("{} {:02d}:{:02d}", date().to_string(), h, m);
  return fmt::format("{} {:02d}:{:02d}:{:02d}", date().to_string(), h, m, s);
}

int parse_clock_minutes(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    fail(ErrorCode::MalformedRow, fmt::format("bad clock time '{}'", text));
  }
  const int h = parse_int(text.substr(0, colon), "hour");
  const int m = parse_int(text.substr(colon + 1), "minute");
  if (h < 0 || h > 24 || m < 0 || m > 59 || (h == 24 && m != 0)) {
    fail(ErrorCode::MalformedRow, fmt::format("bad clock time '{}'", text));
  }
  return h * 60 + m;
}

std::string format_clock_minutes(int minutes) {
  return fmt::format("{:02d}:{:02d}", minutes / 60, minutes % 60);
}

}  // namespace glucolens
