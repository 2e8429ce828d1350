#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moodpulse/changepoint.hpp"
#include "moodpulse/series.hpp"
#include "moodpulse/stats.hpp"

namespace moodpulse {

/// Interrupted time-series fit y = b0 + b1*t + b2*after + b3*t*after.
struct ITSFit {
    std::array<double, 4> beta{};
    std::array<double, 4> std_err{};
    std::array<double, 4> p_values{};
    std::size_t n = 0;
    std::size_t dof = 0;
    double segment_mean = 0.0;
};

struct ShortTermChange {
    AffectCategory category{};
    Date event_date{};
    ITSFit fit;
    std::optional<double> pct_change;  // nullopt when the window mean is zero
    double p_value = 1.0;              // p of b3
    bool window_imputed = false;
};

struct LongTermChange {
    AffectCategory category{};
    Date event_date{};
    double baseline_mean = 0.0;
    double post_mean = 0.0;
    std::optional<double> pct_change;  // nullopt when the baseline mean is zero
    double t_stat = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    TTestKind test = TTestKind::welch;
    bool window_imputed = false;
};

inline constexpr int kItsDaysBefore = 7;
inline constexpr int kItsDaysAfter = 3;
inline constexpr int kBaselineDays = 7;
inline constexpr int kLongTermFrom = 12;
inline constexpr int kLongTermTo = 16;

/// Builds the (1, t, after, t*after) design for `n` observations with the indicator switching on
/// at index `event_index`; t runs 0..n-1.
DesignMatrix its_design(std::size_t n, std::size_t event_index);

/// 11-day window [cp-7, cp+3]; the event day counts as "after". Throws DataError when the window
/// leaves the series.
ShortTermChange short_term_change(const DailyAffectSeries& series, Date cp_date);

/// Baseline days -7..-1 against days +12..+16. Throws DataError when not covered.
LongTermChange long_term_change(const DailyAffectSeries& series, Date cp_date, TTestKind kind = TTestKind::welch);

/// "***" (p < 0.001), "**" (p < 0.01), "*" (p < 0.05) or "".
std::string_view significance_stars(double p) noexcept;

/// "+50.00%" / "-52.77%".
std::string format_percent(double pct);

struct ReactionRecord {
    ChangePoint change_point;
    std::optional<ShortTermChange> short_term;
    std::string short_term_error;
    std::optional<LongTermChange> long_term;
    std::string long_term_error;
};

void write_reactions_json(std::ostream& out, std::span<const ReactionRecord> records);

}  // namespace moodpulse
