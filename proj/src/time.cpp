#include "coda/time.hpp"

#include <cctype>
#include <cstdio>

#include "coda/error.hpp"

namespace coda {

// Howard Hinnant's civil date algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = static_cast<int>(y + (month <= 2));
}

namespace {

bool all_digits(const std::string& s, size_t from, size_t to) {
    if (to > s.size()) return false;
    for (size_t i = from; i < to; ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

int to_int(const std::string& s, size_t from, size_t to) {
    int v = 0;
    for (size_t i = from; i < to; ++i) v = v * 10 + (s[i] - '0');
    return v;
}

}  // namespace

TimePoint parse_iso_time(const std::string& text) {
    // YYYY-MM-DDTHH:MM[:SS][Z]
    std::string s = text;
    if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
    if (s.size() != 16 && s.size() != 19)
        throw ParseError("invalid timestamp '" + text + "'");
    if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':')
        throw ParseError("invalid timestamp '" + text + "'");
    if (!all_digits(s, 0, 4) || !all_digits(s, 5, 7) || !all_digits(s, 8, 10) ||
        !all_digits(s, 11, 13) || !all_digits(s, 14, 16))
        throw ParseError("invalid timestamp '" + text + "'");
    if (s.size() == 19 && (s[16] != ':' || !all_digits(s, 17, 19)))
        throw ParseError("invalid timestamp '" + text + "'");

    const int year = to_int(s, 0, 4);
    const int month = to_int(s, 5, 7);
    const int day = to_int(s, 8, 10);
    const int hour = to_int(s, 11, 13);
    const int minute = to_int(s, 14, 16);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59)
        throw ParseError("invalid timestamp '" + text + "'");
    return {days_from_civil(year, month, day) * kMinutesPerDay + hour * kMinutesPerHour + minute};
}

std::string format_iso_time(TimePoint t) {
    std::int64_t days = t.minutes / kMinutesPerDay;
    std::int64_t rem = t.minutes % kMinutesPerDay;
    if (rem < 0) {
        rem += kMinutesPerDay;
        days -= 1;
    }
    int year, month, day;
    civil_from_days(days, year, month, day);
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld", year, month, day,
                  static_cast<long long>(rem / 60), static_cast<long long>(rem % 60));
    return buf;
}

int parse_time_of_day(const std::string& text) {
    if (text.size() != 5 || text[2] != ':' || !all_digits(text, 0, 2) || !all_digits(text, 3, 5))
        throw ParseError("invalid time of day '" + text + "'");
    const int hour = to_int(text, 0, 2);
    const int minute = to_int(text, 3, 5);
    if (hour > 23 || minute > 59) throw ParseError("invalid time of day '" + text + "'");
    return hour * 60 + minute;
}

}  // namespace coda
