#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace moodpulse {

using Date = std::chrono::sys_days;
using Instant = std::chrono::sys_seconds;

std::optional<Date> parse_date(std::string_view iso) noexcept;
std::string format_date(Date d);

/// ISO-8601 instant with a mandatory offset (`Z`, `+hh:mm`, `+hhmm` or `+hh`).
/// Fractional seconds are accepted and truncated.
std::optional<Instant> parse_timestamp(std::string_view iso) noexcept;
std::string format_timestamp(Instant t);

/// An IANA time zone resolved against the system zoneinfo database.
class TimeZone {
public:
    /// Throws ConfigError when the name does not resolve.
    static TimeZone locate(std::string_view name);
    static TimeZone utc();

    const std::string& name() const noexcept { return name_; }
    bool is_utc() const noexcept { return utc_; }

    Date local_date(Instant t) const;

private:
    TimeZone(std::string name, bool utc) : name_(std::move(name)), utc_(utc) {}

    std::string name_;
    bool utc_;
};

inline Date bucket_day(Instant t, const TimeZone& zone) { return zone.local_date(t); }

}  // namespace moodpulse
