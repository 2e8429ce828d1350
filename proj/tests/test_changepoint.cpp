#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "moodpulse/changepoint.hpp"
#include "moodpulse/error.hpp"
#include "oracles.hpp"

using namespace moodpulse;
using fixtures::day0;
using fixtures::make_series;

namespace {

std::vector<double> step(std::size_t n, std::size_t at, double lo, double hi) {
    std::vector<double> v(n, lo);
    for (std::size_t i = at; i < n; ++i) v[i] = hi;
    return v;
}

Date day(int i) { return day0() + std::chrono::days(i); }

}  // namespace

TEST_CASE("CUSUM window on a noiseless step") {
    auto v = step(28, 14, 0.1, 0.2);
    auto r = cusum_window(v, 1000, 42);
    CHECK(r.split == 14);
    CHECK(r.confidence >= 1.0 - 1.0 / 1000);
    CHECK(r.direction == Direction::increase);

    auto down = cusum_window(step(28, 14, 0.2, 0.1), 1000, 42);
    CHECK(down.direction == Direction::decrease);
}

TEST_CASE("CUSUM confidence agrees with exhaustive permutation") {
    const std::vector<double> x{0, 0, 0, 1, 1, 1};
    const double exact = oracle::exhaustive_cusum_confidence(x);
    CHECK(exact == doctest::Approx(504.0 / 720.0).epsilon(1e-12));
    auto r = cusum_window(x, 20000, 5);
    CHECK(r.split == 3);
    CHECK(std::fabs(r.confidence - exact) < 0.01);

    const std::vector<double> y{0.3, 0.1, 0.4, 0.15, 0.9, 0.8, 0.85};
    auto ry = cusum_window(y, 20000, 9);
    CHECK(std::fabs(ry.confidence - oracle::exhaustive_cusum_confidence(y)) < 0.01);
}

TEST_CASE("CUSUM degenerate and invalid windows") {
    CHECK(cusum_window(std::vector<double>(28, 0.3), 1000, 1).confidence == 0.0);
    CHECK_THROWS_AS(cusum_window(std::vector<double>{0.1, 0.2, 0.3}, 100, 1), DataError);
    CHECK_THROWS_AS(cusum_window(std::vector<double>{0.1, NAN, 0.3, 0.4}, 100, 1), DataError);
}

TEST_CASE("CUSUM is invariant under positive affine maps") {
    auto x = fixtures::gaussian(28, 0.2, 0.05, 17);
    for (std::size_t i = 12; i < 28; ++i) x[i] += 0.04;
    auto base = cusum_window(x, 500, 3);
    for (auto [a, b] : {std::pair{1.0, 0.05}, std::pair{2.0, 0.0}, std::pair{0.5, 0.0}, std::pair{4.0, -1.0}}) {
        std::vector<double> y;
        for (double e : x) y.push_back(a * e + b);
        auto r = cusum_window(y, 500, 3);
        CHECK(r.split == base.split);
        CHECK(r.confidence == base.confidence);
        CHECK(r.direction == base.direction);
    }
}

TEST_CASE("cusum_detect on a noiseless step") {
    DetectorConfig cfg;
    auto cps = cusum_detect(make_series(step(120, 60, 0.1, 0.16)), cfg);
    REQUIRE(cps.size() == 1);
    CHECK(cps[0].date == day(60));
    CHECK(cps[0].confidence >= 0.99);
    CHECK(cps[0].method == DetectionMethod::cusum);

    CHECK(cusum_detect(make_series(std::vector<double>(120, 0.2)), cfg).empty());
    CHECK_THROWS_AS(cusum_detect(make_series(std::vector<double>(20, 0.2)), cfg), DataError);
}

TEST_CASE("cusum_detect finds two steps 40 days apart") {
    std::vector<double> v(120, 0.1);
    for (std::size_t i = 40; i < 80; ++i) v[i] = 0.2;
    for (std::size_t i = 80; i < 120; ++i) v[i] = 0.3;
    auto cps = cusum_detect(make_series(v), DetectorConfig{});
    REQUIRE(cps.size() == 2);
    CHECK(cps[0].date == day(40));
    CHECK(cps[1].date == day(80));
}

TEST_CASE("run-length posterior matches the naive recursion") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(20);
        const double jump = u(rng) < 0.5 ? 0.0 : 0.3;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.2 + 0.05 * u(rng) + (i >= 10 ? jump : 0.0);
        const ResolvedPrior prior = resolve_prior(BocpdPrior{}, x);
        const double hazard = 0.01 + 0.2 * u(rng);
        auto post = run_length_posterior(x, prior, hazard, 0.0);
        auto naive = oracle::naive_bocpd(x, prior.mu0, prior.kappa0, prior.alpha0, prior.beta0, hazard);
        REQUIRE(post.steps == x.size());
        double worst = 0.0;
        for (std::size_t t = 0; t < x.size(); ++t) {
            auto row = post.row(t);
            CHECK(std::fabs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) < 1e-9);
            for (std::size_t r = 0; r < row.size(); ++r) {
                double want = r < naive[t].size() ? naive[t][r] : 0.0;
                worst = std::max(worst, std::fabs(row[r] - want));
            }
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("truncated posterior rows still sum to one") {
    auto x = fixtures::gaussian(200, 0.1, 0.01, 8);
    auto post = run_length_posterior(x, resolve_prior(BocpdPrior{}, x), 0.01);
    for (std::size_t t = 0; t < post.steps; ++t) {
        auto row = post.row(t);
        CHECK(std::fabs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) < 1e-9);
    }
}

TEST_CASE("BOCPD on a constant series and a spike") {
    DetectorConfig cfg;
    CHECK(bocpd_detect(make_series(std::vector<double>(120, 0.1)), cfg).empty());

    auto x = fixtures::gaussian(120, 0.10, 0.01, 99);
    x[60] += 0.10;
    auto cps = bocpd_detect(make_series(x), cfg);
    bool near = std::any_of(cps.begin(), cps.end(), [](const ChangePoint& c) {
        return std::abs((c.date - day(60)).count()) <= 1;
    });
    CHECK(near);
    CHECK_THROWS_AS(bocpd_detect(make_series({0.1, 0.2, 0.3, 0.4}), cfg), DataError);
}

TEST_CASE("merge rules") {
    DetectorConfig cfg;
    using M = DetectionMethod;
    const auto anger = AffectCategory::anger;
    std::vector<ChangePoint> cu{{anger, day(40), M::cusum, 0.6, Direction::increase}};
    std::vector<ChangePoint> bo{{anger, day(41), M::bocpd, 0.7, Direction::increase}};
    auto m = merge_changepoints(cu, bo, cfg);
    REQUIRE(m.size() == 1);
    CHECK(m[0].date == day(41));
    CHECK(m[0].confidence == 0.7);
    CHECK(m[0].method == M::bocpd);

    CHECK(merge_changepoints({}, {}, cfg).empty());
    std::vector<ChangePoint> low{{anger, day(40), M::cusum, 0.4, Direction::increase}};
    CHECK(merge_changepoints(low, {}, cfg).empty());

    std::vector<ChangePoint> tie_b{{anger, day(39), M::bocpd, 0.6, Direction::increase}};
    auto t = merge_changepoints(cu, tie_b, cfg);
    REQUIRE(t.size() == 1);
    CHECK(t[0].method == M::cusum);

    std::vector<ChangePoint> other{{AffectCategory::fear, day(40), M::bocpd, 0.9, Direction::decrease}};
    auto two = merge_changepoints(cu, other, cfg);
    REQUIRE(two.size() == 2);
    CHECK(two[0].category == AffectCategory::anger);
}

TEST_CASE("changepoint JSON round trip and determinism") {
    auto x = fixtures::gaussian(120, 0.10, 0.01, 4);
    for (std::size_t i = 60; i < 120; ++i) x[i] += 0.06;
    DetectorConfig cfg;
    cfg.rng_seed = 77;
    auto a = detect_changepoints(make_series(x), cfg);
    auto b = detect_changepoints(make_series(x), cfg);
    CHECK(a == b);
    REQUIRE_FALSE(a.empty());

    std::stringstream s1, s2;
    write_changepoints_json(s1, a);
    write_changepoints_json(s2, b);
    CHECK(s1.str() == s2.str());
    auto back = read_changepoints_json(s1);
    REQUIRE(back.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(back[i].date == a[i].date);
        CHECK(back[i].category == a[i].category);
        CHECK(back[i].method == a[i].method);
        CHECK(back[i].confidence == doctest::Approx(a[i].confidence).epsilon(1e-6));
    }
}

TEST_CASE("detector config validation") {
    DetectorConfig cfg;
    cfg.hazard = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = DetectorConfig{};
    cfg.window_days = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(DetectorConfig{}.validate());
}
