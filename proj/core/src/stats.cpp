#include "moodpulse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "moodpulse/error.hpp"

namespace moodpulse {

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    long double sum = 0.0L;
    for (double x : v) sum += x;
    return static_cast<double>(sum / static_cast<long double>(v.size()));
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

double student_t_two_sided_p(double t, double dof) {
    if (std::isnan(t) || !(dof > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    boost::math::students_t dist(dof);
    double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    return std::clamp(p, 0.0, 1.0);
}

OlsFit ols_fit(const DesignMatrix& design, std::span<const double> y) {
    const std::size_t n = design.rows, p = design.cols;
    if (design.data.size() != n * p) throw DataError("design matrix storage does not match its shape");
    if (y.size() != n) throw DataError("response length does not match design rows");
    if (n <= p) throw DataError("need more observations than columns for OLS inference");
    for (double v : design.data)
        if (!std::isfinite(v)) throw DataError("design matrix contains non-finite values");
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("response contains non-finite values");

    using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Matrix> X(design.data.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::Map<const Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(n));

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    auto rank = static_cast<std::size_t>(qr.rank());
    if (rank < p) {
        std::string cols;
        const auto& perm = qr.colsPermutation().indices();
        for (std::size_t k = rank; k < p; ++k) {
            auto j = static_cast<std::size_t>(perm[static_cast<Eigen::Index>(k)]);
            if (!cols.empty()) cols += ", ";
            cols += j < design.column_names.size() ? design.column_names[j] : "column " + std::to_string(j);
        }
        throw DataError("design matrix is rank deficient (rank " + std::to_string(rank) + " of " + std::to_string(p) +
                        "); collinear: " + cols);
    }

    Eigen::VectorXd beta = qr.solve(Y);
    Eigen::VectorXd resid = Y - X * beta;

    // (X'X)^-1 = P R^-1 R^-T P'
    Eigen::MatrixXd R = qr.matrixR().topLeftCorner(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p))
                            .triangularView<Eigen::Upper>();
    Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
    Eigen::MatrixXd unpermuted = Rinv * Rinv.transpose();
    Eigen::MatrixXd cov_unscaled = qr.colsPermutation() * unpermuted * qr.colsPermutation().transpose();

    OlsFit fit;
    fit.n = n;
    fit.dof = n - p;
    fit.rss = resid.squaredNorm();
    fit.beta.assign(beta.data(), beta.data() + p);
    fit.residuals.assign(resid.data(), resid.data() + n);

    const double y_norm = Y.norm();
    const double sigma2 = fit.rss / static_cast<double>(fit.dof);
    fit.exact_fit = std::sqrt(fit.rss) <= 1e-12 * std::max(y_norm, std::numeric_limits<double>::min());

    fit.std_err.resize(p);
    fit.t_stat.resize(p);
    fit.p_values.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        auto jj = static_cast<Eigen::Index>(j);
        fit.std_err[j] = std::sqrt(sigma2 * cov_unscaled(jj, jj));
        if (fit.exact_fit) {
            // Coefficient contribution below rounding of the response counts as zero.
            double contribution = std::fabs(fit.beta[j]) * X.col(jj).norm();
            bool zero = contribution <= 1e-9 * std::max(y_norm, std::numeric_limits<double>::min());
            fit.t_stat[j] = zero ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), fit.beta[j]);
            fit.p_values[j] = zero ? 1.0 : 0.0;
        } else {
            fit.t_stat[j] = fit.beta[j] / fit.std_err[j];
            fit.p_values[j] = student_t_two_sided_p(fit.t_stat[j], static_cast<double>(fit.dof));
        }
    }
    return fit;
}

TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b, TTestKind kind) {
    if (a.size() < 2 || b.size() < 2) throw DataError("t-test needs at least two values per sample");
    TTestResult r;
    r.mean_a = mean(a);
    r.mean_b = mean(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = sample_variance(a), vb = sample_variance(b);
    double se2 = 0.0;
    if (kind == TTestKind::welch) {
        se2 = va / na + vb / nb;
        double num = se2 * se2;
        double den = (va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0);
        r.dof = den > 0.0 ? num / den : na + nb - 2.0;
    } else {
        double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        se2 = pooled * (1.0 / na + 1.0 / nb);
        r.dof = na + nb - 2.0;
    }
    const double diff = r.mean_a - r.mean_b;
    // Constant samples leave rounding-level variance behind; judge both against the data scale.
    const double scale = std::max({std::fabs(r.mean_a), std::fabs(r.mean_b), std::numeric_limits<double>::min()});
    const double tol = 1e-12 * scale;
    if (std::sqrt(se2) <= tol) {
        bool equal = std::fabs(diff) <= tol;
        r.t = equal ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        r.p_value = equal ? 1.0 : 0.0;
        return r;
    }
    r.t = diff / std::sqrt(se2);
    r.p_value = student_t_two_sided_p(r.t, r.dof);
    return r;
}

}  // namespace moodpulse
