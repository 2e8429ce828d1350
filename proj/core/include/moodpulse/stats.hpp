#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace moodpulse {

/// Two-sided p-value of a t statistic. Infinite |t| gives 0; NaN gives NaN.
double student_t_two_sided_p(double t, double dof);

/// Row-major n x p design.
struct DesignMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;
    std::vector<std::string> column_names;  // optional, used in rank-deficiency errors

    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct OlsFit {
    std::vector<double> beta;
    std::vector<double> std_err;
    std::vector<double> t_stat;
    std::vector<double> p_values;
    std::vector<double> residuals;
    double rss = 0.0;
    std::size_t n = 0;
    std::size_t dof = 0;
    /// Residuals vanish to rounding; p-values then follow the exact-fit convention
    /// (1 for a numerically zero coefficient, 0 otherwise).
    bool exact_fit = false;
};

/// Least squares via column-pivoted Householder QR. Throws DataError when n <= p or the design is
/// rank deficient (naming the dependent columns).
OlsFit ols_fit(const DesignMatrix& design, std::span<const double> y);

enum class TTestKind { welch, pooled };

struct TTestResult {
    double t = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
};

/// Two-sample two-sided t-test of a vs b. With zero standard error, p is 1 for equal means and
/// 0 otherwise. Throws DataError when either sample has fewer than two values.
TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b, TTestKind kind);

double mean(std::span<const double> v);
/// Sample variance (n - 1). Zero for n < 2.
double sample_variance(std::span<const double> v);

}  // namespace moodpulse
