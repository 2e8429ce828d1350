#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "moodpulse/affect.hpp"
#include "moodpulse/calendar.hpp"

namespace moodpulse {

/// Daily fraction of posts carrying one affect label. Day i is `start + i`.
struct DailyAffectSeries {
    AffectCategory category{};
    Date start{};
    std::vector<double> values;  // meaningful only where !missing[i] (or after imputation)
    std::vector<std::size_t> counts;
    std::vector<bool> missing;

    std::size_t size() const noexcept { return values.size(); }
    Date date_at(std::size_t i) const noexcept { return start + std::chrono::days(static_cast<int>(i)); }
    /// Index of `d`, or -1 when out of range.
    std::ptrdiff_t index_of(Date d) const noexcept;
};

/// Ordered by category. Built series carry all 21; a user-supplied file may carry a subset.
using SeriesSet = std::vector<DailyAffectSeries>;

/// Throws DataError on empty input. The day range spans min..max observed day; days without
/// posts are marked missing with count 0 and value 0.
SeriesSet build_daily_fractions(std::span<const std::pair<Date, LabelVector>> posts);

/// Linear interpolation across interior gaps, nearest-value copy at the ends. `missing` is kept.
/// Throws DataError when fewer than two days are observed.
DailyAffectSeries impute_missing(const DailyAffectSeries& series);

/// Long CSV `date,category,fraction,count,missing`; fraction is empty on missing days.
/// Reals use shortest round-trip formatting.
void write_series_csv(std::ostream& out, const SeriesSet& series);
/// Throws ParseError on malformed rows and DataError on date gaps or duplicate rows. Categories may
/// cover different date ranges.
SeriesSet read_series_csv(std::istream& in);

}  // namespace moodpulse
