#include "moodpulse/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>

#include "csv.hpp"
#include "moodpulse/error.hpp"

namespace moodpulse {

std::vector<EventVerdict> load_verdicts(std::istream& in) {
    std::vector<EventVerdict> out;
    std::string line;
    std::size_t lineno = 0;
    std::optional<detail::CsvHeader> header;
    std::size_t c_id = 0, c_start = 0, c_end = 0, c_verified = 0;
    std::optional<std::size_t> c_desc;
    while (std::getline(in, line)) {
        ++lineno;
        detail::normalize_line(line, lineno == 1);
        if (detail::trim(line).empty()) continue;
        if (!header) {
            header = detail::parse_csv_header(line);
            auto id = header->find("event_id"), s = header->find("start_date"), e = header->find("end_date"),
                 v = header->find("verified");
            if (!id || !s || !e || !v)
                throw ParseError(lineno, "verdict header needs event_id, start_date, end_date and verified");
            c_id = *id;
            c_start = *s;
            c_end = *e;
            c_verified = *v;
            c_desc = header->find("description");
            continue;
        }
        auto fields = detail::split_csv_line(line);
        if (!fields || fields->size() != header->names.size()) throw ParseError(lineno, "wrong field count");
        EventVerdict v;
        v.event_id = std::string(detail::trim((*fields)[c_id]));
        if (v.event_id.empty()) throw ParseError(lineno, "empty event_id");
        auto s = parse_date(detail::trim((*fields)[c_start]));
        auto e = parse_date(detail::trim((*fields)[c_end]));
        if (!s || !e) throw ParseError(lineno, "invalid date");
        if (*e < *s) throw ParseError(lineno, "end_date precedes start_date");
        v.start = *s;
        v.end = *e;
        auto flag = detail::to_lower_ascii(detail::trim((*fields)[c_verified]));
        if (flag == "1" || flag == "true") {
            v.verified = true;
        } else if (flag != "0" && flag != "false") {
            throw ParseError(lineno, "verified must be 0 or 1");
        }
        if (c_desc) v.description = (*fields)[*c_desc];
        out.push_back(std::move(v));
    }
    return out;
}

std::size_t EventCluster::distinct_categories() const {
    std::set<AffectCategory> cats;
    for (const auto& m : members) cats.insert(m.category);
    return cats.size();
}

std::vector<EventCluster> group_events(std::span<const ChangePoint> changepoints, std::size_t window_days) {
    std::vector<ChangePoint> sorted(changepoints.begin(), changepoints.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const ChangePoint& a, const ChangePoint& b) {
        if (a.date != b.date) return a.date < b.date;
        return a.category < b.category;
    });
    std::vector<EventCluster> out;
    for (const auto& cp : sorted) {
        if (out.empty() || (cp.date - out.back().last).count() > static_cast<long>(window_days)) {
            out.emplace_back();
            out.back().first = cp.date;
        }
        out.back().members.push_back(cp);
        out.back().last = cp.date;
    }
    return out;
}

void assign_verdicts(std::vector<EventCluster>& clusters, std::vector<EventVerdict>& verdicts) {
    for (auto& c : clusters) {
        for (std::size_t i = 0; i < verdicts.size(); ++i) {
            auto& v = verdicts[i];
            if (v.start <= c.last && c.first <= v.end) {
                c.verdict = i;
                c.verified = v.verified;
                for (const auto& m : c.members)
                    if (m.date >= v.start && m.date <= v.end) v.matched_changepoints.emplace_back(m.category, m.date);
                break;
            }
        }
        if (!c.verdict)
            throw DataError("no verdict covers the event cluster " + format_date(c.first) + ".." + format_date(c.last));
    }
}

std::optional<double> precision(std::span<const EventCluster> clusters) {
    if (clusters.empty()) return std::nullopt;
    auto verified = std::count_if(clusters.begin(), clusters.end(), [](const auto& c) { return c.verified; });
    return static_cast<double>(verified) / static_cast<double>(clusters.size());
}

std::optional<double> derate(std::span<const EventCluster> clusters) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : clusters) {
        if (!c.verified) continue;
        sum += static_cast<double>(c.distinct_categories()) / static_cast<double>(kCategoryCount);
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

std::optional<ConfidenceSummary> confidence_summary(std::span<const ChangePoint> changepoints) {
    if (changepoints.empty()) return std::nullopt;
    ConfidenceSummary s;
    for (const auto& c : changepoints) s.mean += c.confidence;
    s.mean /= static_cast<double>(changepoints.size());
    if (changepoints.size() > 1) {
        double ss = 0.0;
        for (const auto& c : changepoints) ss += (c.confidence - s.mean) * (c.confidence - s.mean);
        s.std_dev = std::sqrt(ss / static_cast<double>(changepoints.size() - 1));
    }
    return s;
}

EvalReport evaluate(std::span<const ChangePoint> changepoints, std::vector<EventVerdict>* verdicts,
                    std::size_t grouping_window_days) {
    EvalReport r;
    auto clusters = group_events(changepoints, grouping_window_days);
    r.n_changepoints = changepoints.size();
    r.n_events = clusters.size();
    r.confidence = confidence_summary(changepoints);
    if (verdicts) {
        assign_verdicts(clusters, *verdicts);
        r.precision = precision(clusters);
        r.derate = derate(clusters);
    }
    return r;
}

}  // namespace moodpulse
