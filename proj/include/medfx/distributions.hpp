#pragma once

namespace medfx::dist {

double normal_cdf(double z);
double normal_quantile(double p);
/// Two-sided p-value of a standard-normal statistic.
double normal_two_sided_p(double z);
/// Two-sided p-value of a Student-t statistic with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);
/// Upper tail P(X > q) of a chi-square variable.
double chi_square_upper(double q, double df);

} // namespace medfx::dist
