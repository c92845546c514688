#include "stylemill/stats.hpp"

#include <cmath>
#include <string>

#include "stylemill/errors.hpp"

namespace stylemill {

namespace {

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for I_x(a,b), modified Lentz algorithm.
// https://en.wikipedia.org/wiki/Beta_function#Incomplete_beta_function
double ibeta_continued_fraction(double x, double a, double b) {
    const double tiny = 1e-300;
    const double tol = 1e-12;
    const int max_terms = 10000;

    auto numer = [&](int n) -> double {
        if (n == 0) return 1.0;
        if (n % 2 == 0) {
            double m = n / 2;
            return m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
        }
        double m = (n - 1) / 2;
        return -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
    };

    double f = tiny, c = f, d = 0.0;
    for (int n = 0; n < max_terms; ++n) {
        double an = numer(n);
        d = 1.0 + an * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = c * d;
        f *= delta;
        if (n > 0 && std::fabs(delta - 1.0) < tol) return f;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

} // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw NumericError("incomplete beta requires a > 0 and b > 0");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw NumericError("incomplete beta requires x in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    // Use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) where the fraction converges fastest.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front / a * ibeta_continued_fraction(x, a, b);
    }
    return 1.0 - front / b * ibeta_continued_fraction(1.0 - x, b, a);
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw NumericError("t distribution requires df > 0");
    double tail = 0.5 * regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw NumericError("t distribution requires df > 0");
    if (t == 0.0) return 1.0;
    return regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5);
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
    double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DataError("paired t-test requires equal-length samples (" +
                        std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    const std::size_t n = a.size();
    if (n < 2) throw NumericError("paired t-test requires at least 2 pairs");

    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    double sd = sample_stddev(d);
    if (sd == 0.0) throw NumericError("t undefined for constant differences");

    TTestResult r;
    r.n_pairs = n;
    r.df = static_cast<int>(n) - 1;
    r.t_value = mean(d) / (sd / std::sqrt(static_cast<double>(n)));
    r.p_value = t_two_sided_p(r.t_value, static_cast<double>(r.df));
    return r;
}

} // namespace stylemill
