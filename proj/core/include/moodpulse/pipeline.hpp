#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "moodpulse/changepoint.hpp"
#include "moodpulse/corpus.hpp"
#include "moodpulse/error.hpp"
#include "moodpulse/labeling.hpp"
#include "moodpulse/series.hpp"
#include "moodpulse/stats.hpp"
#include "moodpulse/topics.hpp"

namespace moodpulse {

enum class Stage { ingest, label, series, detect, measure, explain, evaluate, report };

std::string_view stage_name(Stage s) noexcept;

/// 3..9 in pipeline order; `report` shares 9 with `evaluate`.
int exit_code(Stage s) noexcept;
inline constexpr int kExitConfigError = 2;

class StageError : public Error {
public:
    StageError(Stage stage, const std::string& what);
    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

enum class LabelerMode { precomputed, lexicon, ddr };

struct PipelinePaths {
    std::filesystem::path corpus;
    InputFormat format = InputFormat::jsonl;
    std::filesystem::path labels;  // precomputed mode
    std::filesystem::path lexicon;
    std::filesystem::path vectors;  // ddr mode
    std::filesystem::path verdicts;
    std::filesystem::path doc_vectors;
    std::filesystem::path gold_labels;
    std::filesystem::path output = "out";
};

struct PipelineConfig {
    PipelinePaths paths;

    std::string time_zone = "UTC";
    std::filesystem::path emoji_table;
    std::filesystem::path hashtag_wordlist;
    std::filesystem::path stopwords;
    MalformedPolicy on_malformed = MalformedPolicy::skip;
    bool dedupe_exact = false;

    LabelerMode labeler = LabelerMode::lexicon;
    DDRConfig ddr;
    DetectorConfig detector;
    TTestKind ttest = TTestKind::welch;
    TopicConfig topics;  // stopwords are filled from `stopwords` at run time
    std::size_t grouping_window_days = 2;
    std::uint64_t seed = 0;

    /// Worker threads for per-category fan-out; does not affect results.
    std::size_t threads = 1;

    /// Sorted `section.key=value` lines of every field that can change results (not `threads` or
    /// the output directory).
    std::string canonical() const;
    std::uint64_t hash() const;
    /// Throws ConfigError.
    void validate() const;
};

/// INI file with [paths], [preprocess], [labeler], [detector], [measure], [topics], [evaluate]
/// and [run] sections. Relative paths resolve against the file's directory. Throws ConfigError.
PipelineConfig load_config(const std::filesystem::path& file);

/// Stage entry points. Each reads the previous stage's files from `dir` (the corpus and other
/// inputs come from the config) and writes its own; failures surface as StageError.
void stage_ingest(const PipelineConfig& config, const std::filesystem::path& dir);
void stage_label(const PipelineConfig& config, const std::filesystem::path& dir);
void stage_series(const PipelineConfig& config, const std::filesystem::path& dir);
void stage_detect(const PipelineConfig& config, const std::filesystem::path& dir);
void stage_measure(const PipelineConfig& config, const std::filesystem::path& dir);
void stage_explain(const PipelineConfig& config, const std::filesystem::path& dir);
void stage_evaluate(const PipelineConfig& config, const std::filesystem::path& dir);
void stage_report(const PipelineConfig& config, const std::filesystem::path& dir);

/// One `plots/<category>.csv` (date,fraction) per series plus `plots/changepoints.csv`.
void export_plot_data(const SeriesSet& series, std::span<const ChangePoint> changepoints,
                      const std::filesystem::path& dir);

/// All stages into a staging directory, then moved into the output directory together with
/// manifest.json. On failure the partial files go to `<output>/quarantine/` and StageError is
/// rethrown.
void run_pipeline(const PipelineConfig& config);

/// Manifest body: version, compiler, config hash and seed.
std::string manifest_json(const PipelineConfig& config);

std::string_view library_version() noexcept;

/// Topic sweep over K = 10, 20, ..., 50 on a deterministic 10% sample of the labeled posts.
/// Writes `topic_sweep.json` into `dir` with NPMI and diversity per K.
void sweep_topics(const PipelineConfig& config, const std::filesystem::path& dir);

}  // namespace moodpulse
