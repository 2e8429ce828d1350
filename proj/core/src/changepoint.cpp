#include "moodpulse/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "csv.hpp"
#include "moodpulse/error.hpp"
#include "moodpulse/seeding.hpp"
#include "moodpulse/stats.hpp"

namespace moodpulse {

std::string_view method_name(DetectionMethod m) noexcept { return m == DetectionMethod::cusum ? "CUSUM" : "BOCPD"; }
std::string_view direction_name(Direction d) noexcept { return d == Direction::increase ? "increase" : "decrease"; }

std::optional<DetectionMethod> parse_method(std::string_view s) noexcept {
    if (s == "CUSUM" || s == "cusum") return DetectionMethod::cusum;
    if (s == "BOCPD" || s == "bocpd") return DetectionMethod::bocpd;
    return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view s) noexcept {
    if (s == "increase") return Direction::increase;
    if (s == "decrease") return Direction::decrease;
    return std::nullopt;
}

void DetectorConfig::validate() const {
    if (window_days == 0 || stride_days == 0) throw ConfigError("window_days and stride_days must be positive");
    if (window_days < 2 * stride_days) throw ConfigError("window_days must be at least twice stride_days");
    if (window_days < 4) throw ConfigError("window_days must be at least 4");
    if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0))
        throw ConfigError("confidence_threshold must lie in [0, 1]");
    if (bootstrap_iters == 0) throw ConfigError("bootstrap_iters must be positive");
    if (!(hazard > 0.0 && hazard < 1.0)) throw ConfigError("hazard must lie in (0, 1)");
    if (!(bocpd_prior.kappa0 > 0.0) || !(bocpd_prior.alpha0 > 0.0))
        throw ConfigError("BOCPD kappa0 and alpha0 must be positive");
    if (bocpd_prior.beta0 && !(*bocpd_prior.beta0 > 0.0)) throw ConfigError("BOCPD beta0 must be positive");
    if (bocpd_prior.mu0 && !std::isfinite(*bocpd_prior.mu0)) throw ConfigError("BOCPD mu0 must be finite");
    if (!(cusum_min_shift_z >= 0.0)) throw ConfigError("cusum_min_shift_z must be non-negative");
}

std::uint64_t category_seed(std::uint64_t seed, AffectCategory c) noexcept { return seed ^ fnv1a64(category_name(c)); }

namespace {

void require_finite(std::span<const double> values) {
    for (double v : values)
        if (!std::isfinite(v)) throw DataError("series contains non-finite values");
}

struct CusumPath {
    std::size_t split = 0;
    double range = 0.0;
    double centre = 0.0;
};

// S_k = sum_{i<=k}(x_i - centre), k = 1..n.
double cusum_range(std::span<const double> x, double centre) {
    double s = 0.0, hi = 0.0, lo = 0.0;
    bool first = true;
    for (double v : x) {
        s += v - centre;
        if (first) {
            hi = lo = s;
            first = false;
        } else {
            hi = std::max(hi, s);
            lo = std::min(lo, s);
        }
    }
    return hi - lo;
}

CusumPath cusum_path(std::span<const double> x) {
    CusumPath p;
    p.centre = mean(x);
    double s = 0.0, best = -1.0, hi = 0.0, lo = 0.0;
    for (std::size_t k = 1; k <= x.size(); ++k) {
        s += x[k - 1] - p.centre;
        if (std::fabs(s) > best) {
            best = std::fabs(s);
            p.split = k;
        }
        if (k == 1) {
            hi = lo = s;
        } else {
            hi = std::max(hi, s);
            lo = std::min(lo, s);
        }
    }
    p.range = hi - lo;
    return p;
}

double robust_noise_scale(std::span<const double> x) {
    if (x.size() < 3) return 0.0;
    std::vector<double> d(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
    auto median = [](std::vector<double> v) {
        auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
        std::nth_element(v.begin(), mid, v.end());
        double m = *mid;
        if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
        return m;
    };
    std::vector<double> raw = d;
    double med = median(d);
    for (double& v : d) v = std::fabs(v - med);
    double mad = median(d);
    if (mad > 0.0) return 1.4826 * mad / std::sqrt(2.0);
    // Mostly repeated values (sparse counts): fall back to the plain standard deviation.
    return std::sqrt(sample_variance(raw)) / std::sqrt(2.0);
}

std::vector<ChangePoint> consolidate(std::vector<ChangePoint> cps, std::size_t merge_window_days) {
    // Per category: chain detections no more than merge_window_days apart, keep the strongest.
    std::sort(cps.begin(), cps.end(), [](const ChangePoint& a, const ChangePoint& b) {
        if (a.category != b.category) return a.category < b.category;
        if (a.date != b.date) return a.date < b.date;
        return a.method < b.method;
    });
    auto better = [](const ChangePoint& a, const ChangePoint& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.method != b.method) return a.method == DetectionMethod::cusum;
        return a.date < b.date;
    };
    std::vector<ChangePoint> out;
    for (std::size_t i = 0; i < cps.size();) {
        std::size_t j = i + 1;
        ChangePoint best = cps[i];
        while (j < cps.size() && cps[j].category == cps[i].category &&
               (cps[j].date - cps[j - 1].date).count() <= static_cast<long>(merge_window_days)) {
            if (better(cps[j], best)) best = cps[j];
            ++j;
        }
        out.push_back(best);
        i = j;
    }
    std::sort(out.begin(), out.end(), [](const ChangePoint& a, const ChangePoint& b) {
        if (a.date != b.date) return a.date < b.date;
        return a.category < b.category;
    });
    return out;
}

// Student-t log density with 2*alpha degrees of freedom, location mu and
// squared scale beta*(kappa+1)/(alpha*kappa).
double log_student_t(double x, double mu, double kappa, double alpha, double beta) {
    const double nu = 2.0 * alpha;
    const double scale2 = beta * (kappa + 1.0) / (alpha * kappa);
    const double z = (x - mu) * (x - mu) / (nu * scale2);
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI * scale2) -
           0.5 * (nu + 1.0) * std::log1p(z);
}

struct RunState {
    std::size_t length;
    double logp;
    double mu, kappa, alpha, beta;
};

double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// One pass of the recursion; calls on_step(t, states) after each normalised update.
template <typename OnStep>
void bocpd_recursion(std::span<const double> values, const ResolvedPrior& prior, double hazard, double truncation,
                     OnStep&& on_step) {
    const double log_h = std::log(hazard), log_1mh = std::log1p(-hazard);
    std::vector<RunState> runs{{0, 0.0, prior.mu0, prior.kappa0, prior.alpha0, prior.beta0}};
    std::vector<RunState> next;
    std::vector<double> joint;
    for (std::size_t t = 0; t < values.size(); ++t) {
        const double x = values[t];
        next.clear();
        joint.clear();
        next.push_back({0, 0.0, prior.mu0, prior.kappa0, prior.alpha0, prior.beta0});
        for (const auto& r : runs) {
            double lp = r.logp + log_student_t(x, r.mu, r.kappa, r.alpha, r.beta);
            joint.push_back(lp);
            RunState g;
            g.length = r.length + 1;
            g.logp = lp + log_1mh;
            g.mu = (r.kappa * r.mu + x) / (r.kappa + 1.0);
            g.kappa = r.kappa + 1.0;
            g.alpha = r.alpha + 0.5;
            g.beta = r.beta + r.kappa * (x - r.mu) * (x - r.mu) / (2.0 * (r.kappa + 1.0));
            next.push_back(g);
        }
        next.front().logp = log_h + log_sum_exp(joint);

        auto normalise = [&] {
            joint.clear();
            for (const auto& r : next) joint.push_back(r.logp);
            double z = log_sum_exp(joint);
            for (auto& r : next) r.logp -= z;
        };
        normalise();
        if (truncation > 0.0) {
            const double cut = std::log(truncation);
            auto keep_end = std::remove_if(next.begin() + 1, next.end(), [&](const RunState& r) { return r.logp < cut; });
            if (keep_end != next.end()) {
                next.erase(keep_end, next.end());
                normalise();
            }
        }
        runs.swap(next);
        on_step(t, runs);
    }
}

}  // namespace

CusumWindowResult cusum_window(std::span<const double> values, std::size_t bootstrap_iters, std::uint64_t rng_seed) {
    if (values.size() < 4) throw DataError("CUSUM window needs at least 4 values");
    require_finite(values);
    const auto path = cusum_path(values);

    CusumWindowResult r;
    r.split = path.split;
    const std::span<const double> before = values.first(path.split), after = values.subspan(path.split);
    r.direction = !after.empty() && mean(after) > mean(before) ? Direction::increase : Direction::decrease;

    const bool constant = std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
    if (constant || path.range == 0.0 || bootstrap_iters == 0) {
        r.confidence = 0.0;
        return r;
    }

    std::mt19937_64 rng(rng_seed);
    std::vector<double> perm(values.begin(), values.end());
    // Reorderings that only permute values on one side of an extremum tie the observed range
    // exactly; the margin keeps rounding from counting them as smaller.
    const double cutoff = path.range * (1.0 - 1e-9);
    std::size_t below = 0;
    for (std::size_t i = 0; i < bootstrap_iters; ++i) {
        std::shuffle(perm.begin(), perm.end(), rng);
        if (cusum_range(perm, path.centre) < cutoff) ++below;
    }
    r.confidence = static_cast<double>(below) / static_cast<double>(bootstrap_iters);
    return r;
}

std::vector<ChangePoint> cusum_detect(const DailyAffectSeries& series, const DetectorConfig& config) {
    config.validate();
    const std::span<const double> x = series.values;
    const std::size_t n = x.size(), w = config.window_days;
    if (n < w) {
        throw DataError("series for '" + std::string(category_name(series.category)) + "' has " + std::to_string(n) +
                        " days, shorter than the " + std::to_string(w) + "-day CUSUM window");
    }
    require_finite(x);

    const std::uint64_t task_seed = category_seed(config.rng_seed, series.category);
    const double sigma = robust_noise_scale(x);
    const std::size_t core_lo = w / 4, core_hi = w - w / 4;

    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + w <= n; s += config.stride_days) starts.push_back(s);
    if (starts.back() + w < n) starts.push_back(n - w);  // cover the tail

    std::vector<ChangePoint> candidates;
    for (std::size_t s : starts) {
        auto window = x.subspan(s, w);
        auto path = cusum_path(window);
        const std::size_t k = path.split;
        if (k >= w) continue;  // no split inside the window

        if (config.cusum_localize && (k < core_lo || k > core_hi)) continue;
        if (config.cusum_min_shift_z > 0.0) {
            double shift = std::fabs(mean(window.subspan(k)) - mean(window.first(k)));
            double se = sigma * std::sqrt(1.0 / static_cast<double>(k) + 1.0 / static_cast<double>(w - k));
            double z = se > 0.0 ? shift / se : (shift > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            if (z < config.cusum_min_shift_z) continue;
        }
        const std::size_t at = s + k;
        if (config.cusum_localize) {
            std::size_t centred = at >= w / 2 ? std::min(at - w / 2, n - w) : 0;
            auto again = cusum_path(x.subspan(centred, w));
            auto found = static_cast<long>(centred + again.split);
            if (std::labs(found - static_cast<long>(at)) > static_cast<long>(config.merge_window_days)) continue;
        }

        auto res = cusum_window(window, config.bootstrap_iters, mix_seed(task_seed, s));
        if (res.confidence < config.confidence_threshold) continue;
        candidates.push_back({series.category, series.date_at(at), DetectionMethod::cusum, res.confidence, res.direction});
    }
    return consolidate(std::move(candidates), config.merge_window_days);
}

ResolvedPrior resolve_prior(const BocpdPrior& prior, std::span<const double> values) {
    ResolvedPrior r{};
    const double m = mean(values);
    const double var = sample_variance(values);
    r.mu0 = prior.mu0.value_or(m);
    r.kappa0 = prior.kappa0;
    r.alpha0 = prior.alpha0;
    r.beta0 = prior.beta0.value_or(std::max(var, 1e-12 * std::max(1.0, m * m)));
    return r;
}

RunLengthPosterior run_length_posterior(std::span<const double> values, const ResolvedPrior& prior, double hazard,
                                        double truncation) {
    require_finite(values);
    RunLengthPosterior post;
    post.steps = values.size();
    post.cells.assign(post.steps * (post.steps + 1), 0.0);
    bocpd_recursion(values, prior, hazard, truncation, [&](std::size_t t, const std::vector<RunState>& runs) {
        double* row = post.cells.data() + t * (post.steps + 1);
        for (const auto& r : runs) row[r.length] = std::exp(r.logp);
    });
    return post;
}

std::vector<double> changepoint_scores(std::span<const double> values, const ResolvedPrior& prior, double hazard,
                                       std::size_t cut, std::vector<std::size_t>* map_run_length, double truncation) {
    require_finite(values);
    std::vector<double> scores(values.size(), 0.0);
    if (map_run_length) map_run_length->assign(values.size(), 0);
    bocpd_recursion(values, prior, hazard, truncation, [&](std::size_t t, const std::vector<RunState>& runs) {
        double mass = 0.0, best = -1.0;
        std::size_t arg = 0;
        for (const auto& r : runs) {
            if (r.length > cut) continue;
            double p = std::exp(r.logp);
            mass += p;
            if (r.length > 0 && p > best) {
                best = p;
                arg = r.length;
            }
        }
        scores[t] = std::min(mass, 1.0);
        if (map_run_length) (*map_run_length)[t] = arg;
    });
    return scores;
}

std::vector<ChangePoint> bocpd_detect(const DailyAffectSeries& series, const DetectorConfig& config) {
    config.validate();
    const std::span<const double> x = series.values;
    if (x.size() < 5) throw DataError("BOCPD needs at least 5 observations");
    require_finite(x);

    const auto prior = resolve_prior(config.bocpd_prior, x);
    std::vector<std::size_t> map_run;
    const auto score = changepoint_scores(x, prior, config.hazard, config.bocpd_runlength_cut, &map_run);
    const std::size_t n = x.size(), burn = config.bocpd_burn_in;

    std::vector<ChangePoint> found;
    for (std::size_t t = burn; t < n; ++t) {
        const double c = score[t];
        if (c < config.confidence_threshold) continue;
        if (t > burn && score[t - 1] > c) continue;
        if (t + 1 < n && score[t + 1] >= c) continue;
        // A run of length r at step t began with observation t - r + 1.
        std::size_t run = map_run[t];
        std::size_t at = run == 0 ? t : t + 1 - std::min(run, t + 1);

        auto lo = at >= 3 ? at - 3 : 0;
        auto hi = std::min(n, at + 3);
        double before = at > lo ? mean(x.subspan(lo, at - lo)) : x[at];
        double after = mean(x.subspan(at, hi - at));
        found.push_back({series.category, series.date_at(at), DetectionMethod::bocpd, c,
                         after > before ? Direction::increase : Direction::decrease});
    }
    // Plateaus can produce the same date twice; keep the stronger one.
    std::sort(found.begin(), found.end(), [](const ChangePoint& a, const ChangePoint& b) {
        if (a.date != b.date) return a.date < b.date;
        return a.confidence > b.confidence;
    });
    found.erase(std::unique(found.begin(), found.end(),
                            [](const ChangePoint& a, const ChangePoint& b) { return a.date == b.date; }),
                found.end());
    return found;
}

std::vector<ChangePoint> merge_changepoints(std::span<const ChangePoint> cusum, std::span<const ChangePoint> bocpd,
                                            const DetectorConfig& config) {
    std::vector<ChangePoint> all;
    for (const auto& c : cusum)
        if (c.confidence >= config.confidence_threshold) all.push_back(c);
    for (const auto& c : bocpd)
        if (c.confidence >= config.confidence_threshold) all.push_back(c);
    return consolidate(std::move(all), config.merge_window_days);
}

std::vector<ChangePoint> detect_changepoints(const DailyAffectSeries& series, const DetectorConfig& config) {
    auto filled = impute_missing(series);
    std::vector<ChangePoint> cusum;
    if (filled.size() >= config.window_days) cusum = cusum_detect(filled, config);
    std::vector<ChangePoint> bocpd;
    if (filled.size() >= 5) bocpd = bocpd_detect(filled, config);
    return merge_changepoints(cusum, bocpd, config);
}

void write_changepoints_json(std::ostream& out, std::span<const ChangePoint> cps) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : cps) {
        nlohmann::ordered_json j;
        j["category"] = category_name(c.category);
        j["date"] = format_date(c.date);
        j["method"] = method_name(c.method);
        j["confidence"] = detail::round6(c.confidence);
        j["direction"] = direction_name(c.direction);
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
}

std::vector<ChangePoint> read_changepoints_json(std::istream& in) {
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("invalid change point JSON: ") + e.what());
    }
    if (!arr.is_array()) throw ParseError(0, "change point file must hold a JSON array");
    std::vector<ChangePoint> out;
    for (const auto& j : arr) {
        try {
            ChangePoint c;
            auto cat = parse_category(j.at("category").get<std::string>());
            auto date = parse_date(j.at("date").get<std::string>());
            auto method = parse_method(j.at("method").get<std::string>());
            auto dir = parse_direction(j.at("direction").get<std::string>());
            if (!cat || !date || !method || !dir) throw ParseError(0, "bad change point record: " + j.dump());
            c.category = *cat;
            c.date = *date;
            c.method = *method;
            c.direction = *dir;
            c.confidence = j.at("confidence").get<double>();
            if (!(c.confidence >= 0.0 && c.confidence <= 1.0)) throw ParseError(0, "confidence outside [0, 1]");
            out.push_back(c);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(0, std::string("bad change point record: ") + e.what());
        }
    }
    return out;
}

}  // namespace moodpulse
