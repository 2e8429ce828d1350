#include "moodpulse/calendar.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <mutex>

#include "csv.hpp"
#include "moodpulse/error.hpp"

namespace moodpulse {

namespace {

using namespace std::chrono;

std::optional<int> digits(std::string_view s, std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

std::optional<Date> date_prefix(std::string_view s) {
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto y = digits(s, 0, 4), m = digits(s, 5, 2), d = digits(s, 8, 2);
    if (!y || !m || !d) return std::nullopt;
    year_month_day ymd{year{*y}, month{static_cast<unsigned>(*m)}, day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd};
}

std::filesystem::path zoneinfo_root() {
    if (const char* dir = std::getenv("TZDIR"); dir && *dir) return dir;
    return "/usr/share/zoneinfo";
}

// localtime_r reads the process-wide TZ; serialise zone switches.
std::mutex& tz_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

std::optional<Date> parse_date(std::string_view iso) noexcept {
    iso = detail::trim(iso);
    if (iso.size() != 10) return std::nullopt;
    return date_prefix(iso);
}

std::string format_date(Date d) {
    year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::optional<Instant> parse_timestamp(std::string_view s) noexcept {
    s = detail::trim(s);
    auto d = date_prefix(s);
    if (!d || s.size() < 17 || (s[10] != 'T' && s[10] != 't' && s[10] != ' ')) return std::nullopt;
    auto hh = digits(s, 11, 2), mm = digits(s, 14, 2);
    if (!hh || !mm || s[13] != ':' || *hh > 23 || *mm > 59) return std::nullopt;
    std::size_t pos = 16;
    int ss = 0;
    if (pos < s.size() && s[pos] == ':') {
        auto sec = digits(s, pos + 1, 2);
        if (!sec || *sec > 60) return std::nullopt;
        ss = *sec;
        pos += 3;
        if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
            ++pos;
            std::size_t start = pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
            if (pos == start) return std::nullopt;
        }
    }
    if (pos >= s.size()) return std::nullopt;  // offset is mandatory
    int offset_minutes = 0;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        int sign = s[pos] == '-' ? -1 : 1;
        ++pos;
        auto oh = digits(s, pos, 2);
        if (!oh || *oh > 23) return std::nullopt;
        pos += 2;
        int om = 0;
        if (pos < s.size()) {
            if (s[pos] == ':') ++pos;
            auto m = digits(s, pos, 2);
            if (!m || *m > 59) return std::nullopt;
            om = *m;
            pos += 2;
        }
        offset_minutes = sign * (*oh * 60 + om);
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;
    return Instant{*d} + hours{*hh} + minutes{*mm} + seconds{ss} - minutes{offset_minutes};
}

std::string format_timestamp(Instant t) {
    auto day = floor<days>(t);
    hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(day).c_str(), static_cast<int>(hms.hours().count()),
                  static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
    return buf;
}

TimeZone TimeZone::utc() { return TimeZone("UTC", true); }

TimeZone TimeZone::locate(std::string_view name) {
    std::string n(detail::trim(name));
    if (n.empty() || n == "UTC" || n == "Etc/UTC" || n == "Z" || n == "GMT" || n == "Etc/GMT")
        return TimeZone(n.empty() ? "UTC" : n, true);
    if (n.front() == '/' || n.find("..") != std::string::npos)
        throw ConfigError("invalid time zone name '" + n + "'");
    std::error_code ec;
    auto path = zoneinfo_root() / n;
    if (!std::filesystem::is_regular_file(path, ec)) throw ConfigError("unknown time zone '" + n + "'");
    return TimeZone(n, false);
}

Date TimeZone::local_date(Instant t) const {
    if (utc_) return floor<days>(t);
    std::time_t raw = static_cast<std::time_t>(t.time_since_epoch().count());
    std::tm tm{};
    {
        std::lock_guard lock(tz_mutex());
        static std::string active;
        if (active != name_) {
            ::setenv("TZ", (":" + name_).c_str(), 1);
            ::tzset();
            active = name_;
        }
        if (!::localtime_r(&raw, &tm)) throw DataError("instant out of range for local time conversion");
    }
    year_month_day ymd{year{tm.tm_year + 1900}, month{static_cast<unsigned>(tm.tm_mon + 1)},
                       day{static_cast<unsigned>(tm.tm_mday)}};
    return sys_days{ymd};
}

}  // namespace moodpulse
