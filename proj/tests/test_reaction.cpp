#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "moodpulse/error.hpp"
#include "moodpulse/reaction.hpp"
#include "oracles.hpp"

using namespace moodpulse;
using fixtures::day0;
using fixtures::make_series;

namespace {

std::vector<std::vector<double>> rows_of(const DesignMatrix& d) {
    std::vector<std::vector<double>> rows(d.rows);
    for (std::size_t i = 0; i < d.rows; ++i)
        for (std::size_t j = 0; j < d.cols; ++j) rows[i].push_back(d(i, j));
    return rows;
}

std::vector<double> its_values(double b0, double b1, double b2, double b3) {
    std::vector<double> y;
    for (int t = 0; t < 11; ++t) {
        double a = t >= kItsDaysBefore ? 1.0 : 0.0;
        y.push_back(b0 + b1 * t + b2 * a + b3 * t * a);
    }
    return y;
}

// Series whose days 3..13 hold `window`; the change point is day 10.
DailyAffectSeries around(const std::vector<double>& window, double pad = 0.1) {
    std::vector<double> v(3, pad);
    v.insert(v.end(), window.begin(), window.end());
    v.resize(30, pad);
    return make_series(v);
}

Date cp_day() { return day0() + std::chrono::days(10); }

}  // namespace

TEST_CASE("ITS design layout") {
    auto d = its_design(11, 7);
    CHECK(d.rows == 11);
    CHECK(d.cols == 4);
    CHECK(d(6, 2) == 0.0);
    CHECK(d(7, 2) == 1.0);
    CHECK(d(7, 3) == 7.0);
    CHECK(d(10, 1) == 10.0);
}

TEST_CASE("OLS matches the normal-equation oracle") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::uniform_int_distribution<int> ev(2, 8);
    const auto design = its_design(11, 7);
    for (int trial = 0; trial < 200; ++trial) {
        auto d = trial % 2 ? its_design(11, static_cast<std::size_t>(ev(rng))) : design;
        std::vector<double> y;
        for (std::size_t i = 0; i < d.rows; ++i)
            y.push_back(0.2 + 0.003 * d(i, 1) + 0.02 * d(i, 2) - 0.004 * d(i, 3) + noise(rng));
        auto fit = ols_fit(d, y);
        auto ref = oracle::normal_equation_ols(rows_of(d), y);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(std::fabs(fit.beta[j] - ref.beta[j]) < 1e-9);
            CHECK(std::fabs(fit.std_err[j] - ref.std_err[j]) < 1e-9);
            CHECK(std::fabs(fit.p_values[j] - ref.p_values[j]) < 1e-6);
        }
        for (std::size_t j = 0; j < 4; ++j) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d.rows; ++i) dot += d(i, j) * fit.residuals[i];
            CHECK(std::fabs(dot) < 1e-8);
        }
    }
}

TEST_CASE("OLS noiseless recovery and flat series") {
    auto y = its_values(0.1, 0.01, 0.05, 0.02);
    auto fit = ols_fit(its_design(11, 7), y);
    const double want[] = {0.1, 0.01, 0.05, 0.02};
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::fabs(fit.beta[j] - want[j]) < 1e-10);
    CHECK(fit.exact_fit);

    auto flat = ols_fit(its_design(11, 7), std::vector<double>(11, 0.3));
    CHECK(flat.beta[0] == doctest::Approx(0.3).epsilon(1e-12));
    for (std::size_t j = 1; j < 4; ++j) CHECK(std::fabs(flat.beta[j]) < 1e-12);
}

TEST_CASE("rank-deficient designs are rejected") {
    DesignMatrix d;
    d.rows = 6;
    d.cols = 3;
    d.column_names = {"one", "x", "twice_x"};
    for (int i = 0; i < 6; ++i) d.data.insert(d.data.end(), {1.0, double(i), 2.0 * i});
    std::vector<double> y{1, 2, 3, 4, 5, 7};
    try {
        ols_fit(d, y);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK((msg.find("x") != std::string::npos));
    }
    CHECK_THROWS_AS(ols_fit(its_design(4, 2), std::vector<double>(4, 1.0)), DataError);
}

TEST_CASE("short-term change arithmetic") {
    // b3 = 0.01 and the window mean is 0.02.
    const double b0 = 0.02 - 0.06 / 11.0;
    auto s = short_term_change(around(its_values(b0, 0.0, -0.07, 0.01)), cp_day());
    REQUIRE(s.pct_change);
    CHECK(std::fabs(*s.pct_change - 50.0) < 0.01);
    CHECK(format_percent(*s.pct_change) == "+50.00%");
    CHECK(s.fit.segment_mean == doctest::Approx(0.02).epsilon(1e-12));

    auto flat = short_term_change(around(std::vector<double>(11, 0.2)), cp_day());
    CHECK(std::fabs(*flat.pct_change) < 1e-9);
    CHECK(flat.p_value == doctest::Approx(1.0));

    auto zero = short_term_change(around(std::vector<double>(11, 0.0), 0.0), cp_day());
    CHECK_FALSE(zero.pct_change.has_value());

    CHECK_THROWS_AS(short_term_change(around(std::vector<double>(11, 0.2)), day0() + std::chrono::days(2)), DataError);
}

TEST_CASE("percent formatting") {
    CHECK(format_percent(-52.7731) == "-52.77%");
    CHECK(format_percent(0.0) == "+0.00%");
    CHECK(significance_stars(0.0005) == "***");
    CHECK(significance_stars(0.005) == "**");
    CHECK(significance_stars(0.04) == "*");
    CHECK(significance_stars(0.2) == "");
}

TEST_CASE("short-term change is invariant under positive scaling") {
    auto w = fixtures::gaussian(11, 0.05, 0.004, 12);
    for (int t = 7; t < 11; ++t) w[t] += 0.003 * t;
    auto base = short_term_change(around(w), cp_day());
    for (double c : {0.5, 2.0}) {
        std::vector<double> sw;
        for (double v : w) sw.push_back(c * v);
        auto r = short_term_change(around(sw, 0.1 * c), cp_day());
        CHECK(*r.pct_change == *base.pct_change);
        CHECK(r.p_value == base.p_value);
    }
    std::vector<double> sw;
    for (double v : w) sw.push_back(10.0 * v);
    auto r = short_term_change(around(sw, 1.0), cp_day());
    CHECK(std::fabs(*r.pct_change - *base.pct_change) <= 1e-12 * std::fabs(*base.pct_change));
    CHECK(std::fabs(r.p_value - base.p_value) <= 1e-12 * base.p_value);
}

TEST_CASE("Welch test against the textbook oracle") {
    const std::vector<double> base{0.10, 0.12, 0.11, 0.09, 0.10, 0.11, 0.12};
    const std::vector<double> post{0.15, 0.14, 0.16, 0.15, 0.15};
    auto got = two_sample_t_test(post, base, TTestKind::welch);
    auto ref = oracle::welch(post, base);
    CHECK(std::fabs(got.t - ref.t) < 1e-9);
    CHECK(std::fabs(got.dof - ref.dof) < 1e-9);
    CHECK(std::fabs(got.p_value - ref.p) < 1e-9);

    auto pooled = two_sample_t_test(post, base, TTestKind::pooled);
    CHECK(pooled.dof == 10.0);
    CHECK(pooled.p_value < 0.001);
    CHECK_THROWS_AS(two_sample_t_test(std::vector<double>{1.0}, base, TTestKind::welch), DataError);
}

TEST_CASE("long-term change on a constructed series") {
    // cp at day 10: baseline days 3..9, post days 22..26.
    std::vector<double> v(30, 0.10);
    for (int i = 22; i <= 26; ++i) v[i] = 0.15;
    auto r = long_term_change(make_series(v), cp_day());
    REQUIRE(r.pct_change);
    CHECK(*r.pct_change == doctest::Approx(50.0).epsilon(1e-9));
    CHECK(r.p_value == 0.0);

    auto same = long_term_change(make_series(std::vector<double>(30, 0.1)), cp_day());
    CHECK(*same.pct_change == 0.0);
    CHECK(same.p_value == 1.0);

    const std::vector<double> base{0.10, 0.12, 0.11, 0.09, 0.10, 0.11, 0.12};
    const std::vector<double> post{0.15, 0.14, 0.16, 0.15, 0.15};
    std::copy(base.begin(), base.end(), v.begin() + 3);
    std::copy(post.begin(), post.end(), v.begin() + 22);
    auto w = long_term_change(make_series(v), cp_day());
    auto ref = oracle::welch(post, base);
    CHECK(std::fabs(w.t_stat - ref.t) < 1e-9);
    CHECK(std::fabs(w.p_value - ref.p) < 1e-9);

    CHECK_THROWS_AS(long_term_change(make_series(std::vector<double>(20, 0.1)), cp_day()), DataError);
}

TEST_CASE("missing days inside a window are imputed and flagged") {
    std::vector<double> v(30, 0.1);
    auto s = make_series(v);
    s.missing[8] = true;
    s.values[8] = 0.0;
    s.counts[8] = 0;
    auto r = short_term_change(s, cp_day());
    CHECK(r.window_imputed);
    CHECK(std::fabs(*r.pct_change) < 1e-9);
    CHECK_FALSE(short_term_change(make_series(v), cp_day()).window_imputed);
}

TEST_CASE("reactions JSON carries nulls for failed parts") {
    ReactionRecord rec;
    rec.change_point = ChangePoint{AffectCategory::anger, cp_day(), DetectionMethod::cusum, 0.9, Direction::increase};
    rec.short_term_error = "window leaves the series";
    rec.long_term_error = "not covered";
    std::ostringstream out;
    write_reactions_json(out, std::vector<ReactionRecord>{rec});
    CHECK(out.str().find("\"short_term\": null") != std::string::npos);
    CHECK(out.str().find("window leaves the series") != std::string::npos);
}
