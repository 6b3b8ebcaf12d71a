#pragma once

#include <cstdint>
#include <compare>
#include <string>

namespace coda {

// Absolute civil time at minute resolution (minutes since 1970-01-01T00:00).
struct TimePoint {
    std::int64_t minutes = 0;

    auto operator<=>(const TimePoint&) const = default;
};

constexpr std::int64_t kMinutesPerHour = 60;
constexpr std::int64_t kMinutesPerDay = 24 * 60;

constexpr TimePoint operator+(TimePoint t, std::int64_t mins) { return {t.minutes + mins}; }
constexpr TimePoint operator-(TimePoint t, std::int64_t mins) { return {t.minutes - mins}; }
constexpr std::int64_t operator-(TimePoint a, TimePoint b) { return a.minutes - b.minutes; }

constexpr double minutes_to_hours(std::int64_t mins) { return static_cast<double>(mins) / 60.0; }
constexpr std::int64_t hours_to_minutes(double hours) {
    return static_cast<std::int64_t>(hours * 60.0 + (hours >= 0 ? 0.5 : -0.5));
}

// Parses "YYYY-MM-DDTHH:MM" (optional ":SS" and trailing "Z", seconds truncated).
// Throws ParseError on malformed input.
TimePoint parse_iso_time(const std::string& text);

// Formats as "YYYY-MM-DDTHH:MM".
std::string format_iso_time(TimePoint t);

// Parses "HH:MM" into minutes past midnight.
int parse_time_of_day(const std::string& text);

std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

}  // namespace coda
