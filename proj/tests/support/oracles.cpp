#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oracle {

namespace {

double student_pdf(double x, double nu, double loc, double scale2) {
    const double z = (x - loc) * (x - loc) / (nu * scale2);
    const double logc = std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5 * std::log(nu * M_PI * scale2);
    return std::exp(logc) * std::pow(1 + z, -(nu + 1) / 2);
}

}  // namespace

std::vector<std::vector<double>> naive_bocpd(const std::vector<double>& x, double mu0, double kappa0, double alpha0,
                                             double beta0, double hazard) {
    const std::size_t T = x.size();
    std::vector<std::vector<double>> rows;
    std::vector<double> prev{1.0};  // before any data: run length 0
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> next(prev.size() + 1, 0.0);
        double cp = 0.0;
        for (std::size_t r = 0; r < prev.size(); ++r) {
            // The run of length r holds x[t-r .. t-1].
            const double n = static_cast<double>(r);
            double xbar = 0.0, ss = 0.0;
            for (std::size_t i = t - r; i < t; ++i) xbar += x[i];
            if (r) xbar /= n;
            for (std::size_t i = t - r; i < t; ++i) ss += (x[i] - xbar) * (x[i] - xbar);
            const double kn = kappa0 + n;
            const double mn = r ? (kappa0 * mu0 + n * xbar) / kn : mu0;
            const double an = alpha0 + n / 2;
            const double bn = beta0 + 0.5 * ss + (r ? kappa0 * n * (xbar - mu0) * (xbar - mu0) / (2 * kn) : 0.0);
            const double pred = student_pdf(x[t], 2 * an, mn, bn * (kn + 1) / (an * kn));
            next[r + 1] = prev[r] * pred * (1 - hazard);
            cp += prev[r] * pred * hazard;
        }
        next[0] = cp;
        const double z = std::accumulate(next.begin(), next.end(), 0.0);
        for (double& v : next) v /= z;
        rows.push_back(next);
        prev = next;
    }
    return rows;
}

long double incomplete_beta(long double a, long double b, long double x) {
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    auto cf = [](long double a, long double b, long double x) {
        const long double tiny = 1e-300L, eps = 1e-18L;
        long double c = 1, d = 1 - (a + b) * x / (a + 1);
        if (std::fabs(d) < tiny) d = tiny;
        d = 1 / d;
        long double h = d;
        for (int m = 1; m < 10000; ++m) {
            long double m2 = 2 * m;
            long double aa = m * (b - m) * x / ((a + m2 - 1) * (a + m2));
            d = 1 + aa * d;
            if (std::fabs(d) < tiny) d = tiny;
            c = 1 + aa / c;
            if (std::fabs(c) < tiny) c = tiny;
            d = 1 / d;
            h *= d * c;
            aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1));
            d = 1 + aa * d;
            if (std::fabs(d) < tiny) d = tiny;
            c = 1 + aa / c;
            if (std::fabs(c) < tiny) c = tiny;
            d = 1 / d;
            long double del = d * c;
            h *= del;
            if (std::fabs(del - 1) < eps) break;
        }
        return h;
    };
    const long double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const long double front = std::exp(lbt);
    if (x < (a + 1) / (a + b + 2)) return front * cf(a, b, x) / a;
    return 1 - front * cf(b, a, 1 - x) / b;
}

double t_two_sided(double t, double dof) {
    long double x = static_cast<long double>(dof) / (dof + static_cast<long double>(t) * t);
    return static_cast<double>(incomplete_beta(dof / 2.0L, 0.5L, x));
}

Ols normal_equation_ols(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
    const std::size_t n = rows.size(), p = rows.front().size();
    // Augmented [X'X | X'y | I]
    std::vector<std::vector<long double>> m(p, std::vector<long double>(2 * p + 1, 0));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < n; ++k) m[i][j] += static_cast<long double>(rows[k][i]) * rows[k][j];
        for (std::size_t k = 0; k < n; ++k) m[i][p] += static_cast<long double>(rows[k][i]) * y[k];
        m[i][p + 1 + i] = 1;
    }
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r)
            if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
        std::swap(m[c], m[piv]);
        if (m[c][c] == 0) throw std::runtime_error("singular normal equations");
        long double d = m[c][c];
        for (auto& v : m[c]) v /= d;
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) continue;
            long double f = m[r][c];
            for (std::size_t k = 0; k < 2 * p + 1; ++k) m[r][k] -= f * m[c][k];
        }
    }
    Ols o;
    long double rss = 0;
    for (std::size_t k = 0; k < n; ++k) {
        long double fit = 0;
        for (std::size_t j = 0; j < p; ++j) fit += m[j][p] * rows[k][j];
        rss += (y[k] - fit) * (y[k] - fit);
    }
    const double dof = static_cast<double>(n - p);
    const long double s2 = rss / dof;
    for (std::size_t j = 0; j < p; ++j) {
        o.beta.push_back(static_cast<double>(m[j][p]));
        double se = static_cast<double>(std::sqrt(s2 * m[j][p + 1 + j]));
        o.std_err.push_back(se);
        o.p_values.push_back(t_two_sided(o.beta.back() / se, dof));
    }
    return o;
}

Welch welch(const std::vector<double>& a, const std::vector<double>& b) {
    auto mean = [](const std::vector<double>& v) {
        long double s = 0;
        for (double x : v) s += x;
        return s / v.size();
    };
    auto var = [&](const std::vector<double>& v) {
        long double m = mean(v), s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return s / (v.size() - 1);
    };
    long double na = a.size(), nb = b.size();
    long double qa = var(a) / na, qb = var(b) / nb;
    Welch w;
    w.t = static_cast<double>((mean(a) - mean(b)) / std::sqrt(qa + qb));
    w.dof = static_cast<double>((qa + qb) * (qa + qb) / (qa * qa / (na - 1) + qb * qb / (nb - 1)));
    w.p = t_two_sided(w.t, w.dof);
    return w;
}

std::vector<std::vector<std::string>> all_segmentations(const std::string& s, const std::unordered_set<std::string>& words) {
    if (s.empty()) return {{}};
    std::vector<std::vector<std::string>> out;
    for (std::size_t len = 1; len <= s.size(); ++len) {
        auto head = s.substr(0, len);
        if (!words.count(head)) continue;
        for (auto tail : all_segmentations(s.substr(len), words)) {
            tail.insert(tail.begin(), head);
            out.push_back(std::move(tail));
        }
    }
    return out;
}

double exhaustive_cusum_confidence(const std::vector<double>& x) {
    auto range = [](const std::vector<double>& v, double m) {
        double s = 0, hi = -1e300, lo = 1e300;
        for (double e : v) {
            s += e - m;
            hi = std::max(hi, s);
            lo = std::min(lo, s);
        }
        return hi - lo;
    };
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double observed = range(x, m);
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::size_t below = 0, total = 0;
    do {
        std::vector<double> perm;
        for (auto i : idx) perm.push_back(x[i]);
        if (range(perm, m) < observed * (1 - 1e-9)) ++below;  // exact ties are not below
        ++total;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return static_cast<double>(below) / total;
}

}  // namespace oracle
