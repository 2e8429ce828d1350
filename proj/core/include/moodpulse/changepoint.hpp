#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "moodpulse/affect.hpp"
#include "moodpulse/calendar.hpp"
#include "moodpulse/series.hpp"

namespace moodpulse {

enum class DetectionMethod : std::uint8_t { cusum, bocpd };
enum class Direction : std::uint8_t { increase, decrease };

std::string_view method_name(DetectionMethod m) noexcept;
std::string_view direction_name(Direction d) noexcept;
std::optional<DetectionMethod> parse_method(std::string_view s) noexcept;
std::optional<Direction> parse_direction(std::string_view s) noexcept;

/// Normal-Inverse-Gamma hyperparameters. Unset mean/beta are filled from the series
/// (empirical Bayes: sample mean and variance).
struct BocpdPrior {
    std::optional<double> mu0;
    double kappa0 = 1.0;
    double alpha0 = 1.0;
    std::optional<double> beta0;
};

struct DetectorConfig {
    std::size_t window_days = 28;
    std::size_t stride_days = 3;
    double confidence_threshold = 0.5;
    std::size_t bootstrap_iters = 1000;
    std::uint64_t rng_seed = 0;
    double hazard = 0.01;
    BocpdPrior bocpd_prior;
    std::size_t bocpd_runlength_cut = 2;
    std::size_t bocpd_burn_in = 5;
    std::size_t merge_window_days = 2;
    /// CUSUM candidate gate: two-sample z of the detected split against a robust noise scale.
    /// 0 disables.
    double cusum_min_shift_z = 4.0;
    /// CUSUM candidate gate: split must sit in the window's central half and be re-found by a
    /// window centred on it.
    bool cusum_localize = true;

    /// Throws ConfigError when an invariant fails.
    void validate() const;
};

struct ChangePoint {
    AffectCategory category{};
    Date date{};
    DetectionMethod method = DetectionMethod::cusum;
    double confidence = 0.0;
    Direction direction = Direction::increase;

    friend bool operator==(const ChangePoint&, const ChangePoint&) = default;
};

struct CusumWindowResult {
    std::size_t split = 0;  // k*: count of observations before the shift, 1..n
    double confidence = 0.0;
    Direction direction = Direction::increase;
};

/// Mean-shift CUSUM with a permutation bootstrap on the range max(S) - min(S).
/// Throws DataError when n < 4 or any value is non-finite.
CusumWindowResult cusum_window(std::span<const double> values, std::size_t bootstrap_iters, std::uint64_t rng_seed);

/// Sliding-window CUSUM over one (imputed) series. Throws DataError when shorter than the window.
std::vector<ChangePoint> cusum_detect(const DailyAffectSeries& series, const DetectorConfig& config);

/// Dense run-length posterior: row t holds P(r_t = r | x_1..t) for r = 0..t+1 (zero-padded to T+1).
struct RunLengthPosterior {
    std::size_t steps = 0;
    std::vector<double> cells;  // steps x (steps + 1), row-major

    std::span<const double> row(std::size_t t) const {
        return {cells.data() + t * (steps + 1), steps + 1};
    }
};

struct ResolvedPrior {
    double mu0, kappa0, alpha0, beta0;
};

ResolvedPrior resolve_prior(const BocpdPrior& prior, std::span<const double> values);

/// Constant-hazard BOCPD recursion with a Student-t predictive. Cells below `truncation` are
/// dropped (0 keeps everything).
RunLengthPosterior run_length_posterior(std::span<const double> values, const ResolvedPrior& prior, double hazard,
                                        double truncation = 1e-12);

/// P(r_t <= cut) for every step, computed with the same recursion in linear memory.
std::vector<double> changepoint_scores(std::span<const double> values, const ResolvedPrior& prior, double hazard,
                                       std::size_t cut, std::vector<std::size_t>* map_run_length = nullptr,
                                       double truncation = 1e-12);

/// Throws DataError on non-finite values or fewer than 5 observations.
std::vector<ChangePoint> bocpd_detect(const DailyAffectSeries& series, const DetectorConfig& config);

/// Union, threshold, and per-category consolidation within merge_window_days (max confidence,
/// CUSUM on ties, then earlier date). Sorted by (date, category).
std::vector<ChangePoint> merge_changepoints(std::span<const ChangePoint> cusum, std::span<const ChangePoint> bocpd,
                                            const DetectorConfig& config);

/// Per-category seed: seed XOR FNV-1a(category name).
std::uint64_t category_seed(std::uint64_t seed, AffectCategory c) noexcept;

/// Imputes, runs both detectors and merges, for one series.
std::vector<ChangePoint> detect_changepoints(const DailyAffectSeries& series, const DetectorConfig& config);

/// `changepoints.json`: array of {category, date, method, confidence, direction}.
void write_changepoints_json(std::ostream& out, std::span<const ChangePoint> cps);
std::vector<ChangePoint> read_changepoints_json(std::istream& in);

}  // namespace moodpulse
