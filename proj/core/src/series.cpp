#include "moodpulse/series.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

#include "csv.hpp"
#include "moodpulse/error.hpp"

namespace moodpulse {

std::ptrdiff_t DailyAffectSeries::index_of(Date d) const noexcept {
    auto offset = (d - start).count();
    if (offset < 0 || offset >= static_cast<std::ptrdiff_t>(size())) return -1;
    return offset;
}

SeriesSet build_daily_fractions(std::span<const std::pair<Date, LabelVector>> posts) {
    if (posts.empty()) throw DataError("cannot build series from zero posts");
    auto [lo, hi] = std::minmax_element(posts.begin(), posts.end(),
                                        [](const auto& a, const auto& b) { return a.first < b.first; });
    Date first = lo->first;
    auto n = static_cast<std::size_t>((hi->first - first).count()) + 1;

    std::vector<std::size_t> totals(n, 0);
    std::vector<std::array<std::size_t, kCategoryCount>> flagged(n);
    for (const auto& [day, labels] : posts) {
        auto i = static_cast<std::size_t>((day - first).count());
        ++totals[i];
        for (auto c : all_categories())
            if (labels.test(c)) ++flagged[i][index_of(c)];
    }

    SeriesSet out(kCategoryCount);
    for (auto c : all_categories()) {
        auto& s = out[index_of(c)];
        s.category = c;
        s.start = first;
        s.values.assign(n, 0.0);
        s.counts = totals;
        s.missing.assign(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            if (totals[i] == 0) {
                s.missing[i] = true;
            } else {
                s.values[i] = static_cast<double>(flagged[i][index_of(c)]) / static_cast<double>(totals[i]);
            }
        }
    }
    return out;
}

DailyAffectSeries impute_missing(const DailyAffectSeries& series) {
    std::vector<std::size_t> observed;
    for (std::size_t i = 0; i < series.size(); ++i)
        if (!series.missing[i]) observed.push_back(i);
    if (observed.size() < 2)
        throw DataError("series for '" + std::string(category_name(series.category)) +
                        "' has fewer than two observed days");

    DailyAffectSeries out = series;
    for (std::size_t i = 0; i < observed.front(); ++i) out.values[i] = series.values[observed.front()];
    for (std::size_t i = observed.back() + 1; i < series.size(); ++i) out.values[i] = series.values[observed.back()];
    for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
        std::size_t a = observed[k], b = observed[k + 1];
        for (std::size_t i = a + 1; i < b; ++i) {
            double w = static_cast<double>(i - a) / static_cast<double>(b - a);
            out.values[i] = series.values[a] + w * (series.values[b] - series.values[a]);
        }
    }
    return out;
}

void write_series_csv(std::ostream& out, const SeriesSet& series) {
    out << "date,category,fraction,count,missing\n";
    std::size_t n = series.empty() ? 0 : series.front().size();
    bool aligned = std::all_of(series.begin(), series.end(), [&](const auto& s) {
        return s.size() == n && s.start == series.front().start;
    });
    auto row = [&](const DailyAffectSeries& s, std::size_t i) {
        out << format_date(s.date_at(i)) << ',' << category_name(s.category) << ','
            << (s.missing[i] ? std::string{} : detail::format_real(s.values[i])) << ',' << s.counts[i] << ','
            << (s.missing[i] ? 1 : 0) << '\n';
    };
    if (aligned) {
        // Day-major so that one day's categories sit together.
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& s : series) row(s, i);
    } else {
        for (const auto& s : series)
            for (std::size_t i = 0; i < s.size(); ++i) row(s, i);
    }
}

SeriesSet read_series_csv(std::istream& in) {
    struct Row {
        double value;
        std::size_t count;
        bool missing;
    };
    std::map<AffectCategory, std::map<Date, Row>> rows;

    std::string line;
    std::size_t lineno = 0;
    std::optional<detail::CsvHeader> header;
    std::size_t c_date = 0, c_cat = 0, c_frac = 0;
    std::optional<std::size_t> c_count, c_missing;
    while (std::getline(in, line)) {
        ++lineno;
        detail::normalize_line(line, lineno == 1);
        if (detail::trim(line).empty()) continue;
        if (!header) {
            header = detail::parse_csv_header(line);
            auto d = header->find("date"), c = header->find("category"), f = header->find("fraction");
            if (!d || !c || !f) throw ParseError(lineno, "series header must contain date, category and fraction");
            c_date = *d;
            c_cat = *c;
            c_frac = *f;
            c_count = header->find("count");
            c_missing = header->find("missing");
            continue;
        }
        auto fields = detail::split_csv_line(line);
        if (!fields || fields->size() != header->names.size()) throw ParseError(lineno, "wrong field count");
        auto date = parse_date((*fields)[c_date]);
        if (!date) throw ParseError(lineno, "invalid date '" + (*fields)[c_date] + "'");
        auto cat = parse_category(detail::trim((*fields)[c_cat]));
        if (!cat) throw ParseError(lineno, "unknown category '" + (*fields)[c_cat] + "'");
        Row r{0.0, 0, false};
        if (c_missing) {
            auto m = detail::trim((*fields)[*c_missing]);
            if (m == "1" || m == "true") {
                r.missing = true;
            } else if (!m.empty() && m != "0" && m != "false") {
                throw ParseError(lineno, "missing flag must be 0 or 1");
            }
        }
        auto frac_text = detail::trim((*fields)[c_frac]);
        if (frac_text.empty()) {
            r.missing = true;
        } else if (!r.missing) {
            auto v = detail::parse_real(frac_text);
            if (!v || !(*v >= 0.0 && *v <= 1.0)) throw ParseError(lineno, "fraction must be a real in [0, 1]");
            r.value = *v;
        }
        if (c_count) {
            auto cnt_text = detail::trim((*fields)[*c_count]);
            if (!cnt_text.empty()) {
                auto cnt = detail::parse_int(cnt_text);
                if (!cnt || *cnt < 0) throw ParseError(lineno, "count must be a non-negative integer");
                r.count = static_cast<std::size_t>(*cnt);
            }
        }
        if (!rows[*cat].emplace(*date, r).second)
            throw DataError("duplicate row for " + std::string(category_name(*cat)) + " on " + format_date(*date));
    }

    SeriesSet out;
    for (auto& [cat, days] : rows) {
        DailyAffectSeries s;
        s.category = cat;
        s.start = days.begin()->first;
        auto n = static_cast<std::size_t>((days.rbegin()->first - s.start).count()) + 1;
        if (n != days.size())
            throw DataError("series for '" + std::string(category_name(cat)) + "' has gaps in its date range");
        for (const auto& [d, r] : days) {
            s.values.push_back(r.value);
            s.counts.push_back(r.count);
            s.missing.push_back(r.missing);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace moodpulse
