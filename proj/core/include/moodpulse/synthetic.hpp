#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

namespace moodpulse {

struct SyntheticOptions {
    std::size_t n_posts = 2000;
    std::size_t n_days = 60;
    std::size_t event_day = 40;  // 0-based day of the injected event
    std::uint64_t seed = 7;
    double baseline_anger = 0.25;
};

/// Writes corpus.jsonl, lexicon.tsv, stopwords.txt, verdicts.csv and config.ini into `dir`.
/// Posts are drawn from themed Zipf vocabularies; from `event_day` anger-lexicon use rises and an
/// earthquake theme (quake, tremor, magnitude, ...) appears. The corpus starts on 2024-03-01 UTC.
void write_synthetic_fixture(const std::filesystem::path& dir, const SyntheticOptions& options = {});

}  // namespace moodpulse
