#include "moodpulse/reaction.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "csv.hpp"
#include "moodpulse/error.hpp"

namespace moodpulse {

DesignMatrix its_design(std::size_t n, std::size_t event_index) {
    DesignMatrix d;
    d.rows = n;
    d.cols = 4;
    d.column_names = {"intercept", "time", "after", "time_after"};
    d.data.reserve(n * 4);
    for (std::size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i);
        double after = i >= event_index ? 1.0 : 0.0;
        d.data.insert(d.data.end(), {1.0, t, after, t * after});
    }
    return d;
}

namespace {

struct Window {
    std::vector<double> values;
    bool imputed = false;
};

// Values for days [from, to] relative to `cp`, imputing when any of them is missing.
Window slice(const DailyAffectSeries& series, Date cp, int from, int to) {
    auto idx = series.index_of(cp);
    if (idx < 0) throw DataError("change point " + format_date(cp) + " lies outside the series");
    auto lo = idx + from, hi = idx + to;
    if (lo < 0 || hi >= static_cast<std::ptrdiff_t>(series.size()))
        throw DataError("days " + std::to_string(from) + ".." + std::to_string(to) + " around " + format_date(cp) +
                        " are not covered by the series");
    Window w;
    for (auto i = lo; i <= hi; ++i)
        if (series.missing[static_cast<std::size_t>(i)]) w.imputed = true;
    const DailyAffectSeries* src = &series;
    DailyAffectSeries filled;
    if (w.imputed) {
        filled = impute_missing(series);
        src = &filled;
    }
    w.values.assign(src->values.begin() + lo, src->values.begin() + hi + 1);
    return w;
}

}  // namespace

ShortTermChange short_term_change(const DailyAffectSeries& series, Date cp_date) {
    auto w = slice(series, cp_date, -kItsDaysBefore, kItsDaysAfter);
    auto fit = ols_fit(its_design(w.values.size(), kItsDaysBefore), w.values);

    ShortTermChange r;
    r.category = series.category;
    r.event_date = cp_date;
    r.window_imputed = w.imputed;
    for (std::size_t j = 0; j < 4; ++j) {
        r.fit.beta[j] = fit.beta[j];
        r.fit.std_err[j] = fit.std_err[j];
        r.fit.p_values[j] = fit.p_values[j];
    }
    r.fit.n = fit.n;
    r.fit.dof = fit.dof;
    r.fit.segment_mean = mean(w.values);
    if (r.fit.segment_mean != 0.0) r.pct_change = 100.0 * r.fit.beta[3] / r.fit.segment_mean;
    r.p_value = fit.p_values[3];
    return r;
}

LongTermChange long_term_change(const DailyAffectSeries& series, Date cp_date, TTestKind kind) {
    auto base = slice(series, cp_date, -kBaselineDays, -1);
    auto post = slice(series, cp_date, kLongTermFrom, kLongTermTo);
    auto t = two_sample_t_test(post.values, base.values, kind);

    LongTermChange r;
    r.category = series.category;
    r.event_date = cp_date;
    r.baseline_mean = t.mean_b;
    r.post_mean = t.mean_a;
    if (r.baseline_mean != 0.0) r.pct_change = 100.0 * (r.post_mean - r.baseline_mean) / r.baseline_mean;
    r.t_stat = t.t;
    r.dof = t.dof;
    r.p_value = t.p_value;
    r.test = kind;
    r.window_imputed = base.imputed || post.imputed;
    return r;
}

std::string_view significance_stars(double p) noexcept {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

std::string format_percent(double pct) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.2f%%", pct == 0.0 ? 0.0 : pct);
    return buf;
}

namespace {

nlohmann::ordered_json real_or_null(std::optional<double> v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return detail::round6(*v);
}

nlohmann::ordered_json real(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return detail::round6(v);
}

}  // namespace

void write_reactions_json(std::ostream& out, std::span<const ReactionRecord> records) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& rec : records) {
        nlohmann::ordered_json j;
        j["category"] = category_name(rec.change_point.category);
        j["date"] = format_date(rec.change_point.date);
        j["method"] = method_name(rec.change_point.method);
        j["direction"] = direction_name(rec.change_point.direction);

        if (rec.short_term) {
            const auto& s = *rec.short_term;
            nlohmann::ordered_json st;
            st["pct_change"] = real_or_null(s.pct_change);
            st["display"] = s.pct_change ? format_percent(*s.pct_change) + std::string(significance_stars(s.p_value))
                                         : std::string("n/a");
            st["p_value"] = real(s.p_value);
            st["beta"] = nlohmann::ordered_json::array();
            st["std_err"] = nlohmann::ordered_json::array();
            for (std::size_t k = 0; k < 4; ++k) {
                st["beta"].push_back(real(s.fit.beta[k]));
                st["std_err"].push_back(real(s.fit.std_err[k]));
            }
            st["window_mean"] = real(s.fit.segment_mean);
            st["window_imputed"] = s.window_imputed;
            j["short_term"] = std::move(st);
        } else {
            j["short_term"] = nullptr;
            j["short_term_error"] = rec.short_term_error;
        }

        if (rec.long_term) {
            const auto& l = *rec.long_term;
            nlohmann::ordered_json lt;
            lt["pct_change"] = real_or_null(l.pct_change);
            lt["display"] = l.pct_change ? format_percent(*l.pct_change) + std::string(significance_stars(l.p_value))
                                         : std::string("n/a");
            lt["p_value"] = real(l.p_value);
            lt["t"] = real(l.t_stat);
            lt["dof"] = real(l.dof);
            lt["test"] = l.test == TTestKind::welch ? "welch" : "pooled";
            lt["baseline_mean"] = real(l.baseline_mean);
            lt["post_mean"] = real(l.post_mean);
            lt["window_imputed"] = l.window_imputed;
            j["long_term"] = std::move(lt);
        } else {
            j["long_term"] = nullptr;
            j["long_term_error"] = rec.long_term_error;
        }
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
}

}  // namespace moodpulse
