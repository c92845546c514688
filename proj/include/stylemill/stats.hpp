#pragma once

#include <cstddef>
#include <vector>

namespace stylemill {

// Regularized incomplete beta I_x(a, b), evaluated by Lentz's continued
// fraction to 1e-12 relative convergence. No external statistics library.
double regularized_incomplete_beta(double x, double a, double b);

// CDF of Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

// Two-sided p-value for a t statistic: P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
double t_two_sided_p(double t, double df);

struct TTestResult {
    double t_value = 0.0;
    double p_value = 1.0;
    int df = 0;
    std::size_t n_pairs = 0;
};

// Paired two-sided t-test on equal-length samples; t = mean(d) / (sd(d)/sqrt(n))
// with the sample (n-1) standard deviation of the differences d = a - b.
// Throws NumericError when n < 2 or the differences are constant.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

double mean(const std::vector<double>& v);
// Sample (n-1) standard deviation.
double sample_stddev(const std::vector<double>& v);

} // namespace stylemill
