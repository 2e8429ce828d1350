#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moodpulse/changepoint.hpp"

namespace moodpulse {

struct EventVerdict {
    std::string event_id;
    Date start{};
    Date end{};
    std::string description;
    bool verified = false;
    std::vector<std::pair<AffectCategory, Date>> matched_changepoints;
};

/// Verdict CSV: event_id,start_date,end_date,verified,description (header required, any order).
std::vector<EventVerdict> load_verdicts(std::istream& in);

/// Change points linked across categories into one candidate event.
struct EventCluster {
    std::vector<ChangePoint> members;
    Date first{};
    Date last{};
    std::optional<std::size_t> verdict;  // index into the verdict list once assigned
    bool verified = false;

    std::size_t distinct_categories() const;
};

/// Single-linkage grouping: consecutive change points (sorted by date) no more than
/// `window_days` apart share a cluster. Input need not be sorted.
std::vector<EventCluster> group_events(std::span<const ChangePoint> changepoints, std::size_t window_days = 2);

/// Assigns each cluster the first verdict whose date range overlaps it and records the match.
/// Throws DataError naming the first cluster without a verdict.
void assign_verdicts(std::vector<EventCluster>& clusters, std::vector<EventVerdict>& verdicts);

/// Verified clusters / clusters; nullopt for zero clusters.
std::optional<double> precision(std::span<const EventCluster> clusters);

/// Mean over verified clusters of distinct categories / 21; nullopt when none is verified.
std::optional<double> derate(std::span<const EventCluster> clusters);

struct ConfidenceSummary {
    double mean = 0.0;
    double std_dev = 0.0;  // sample standard deviation, 0 for a single value
};

std::optional<ConfidenceSummary> confidence_summary(std::span<const ChangePoint> changepoints);

struct EvalReport {
    std::optional<double> precision;
    std::optional<double> derate;
    std::size_t n_changepoints = 0;
    std::size_t n_events = 0;
    std::optional<ConfidenceSummary> confidence;
};

EvalReport evaluate(std::span<const ChangePoint> changepoints, std::vector<EventVerdict>* verdicts,
                    std::size_t grouping_window_days = 2);

}  // namespace moodpulse
