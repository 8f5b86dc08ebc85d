#pragma once

#include <vector>

namespace hawkmit::stats {

double mean(const std::vector<double>& x);
double sample_sd(const std::vector<double>& x);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// Regularized upper incomplete gamma Q(a, x).
double upper_incomplete_gamma(double a, double x);

/// P(T >= t) for Student t with df degrees of freedom.
double student_t_sf(double t, double df);
/// P(X >= x) for chi-square with df degrees of freedom.
double chi_square_sf(double x, double df);

/// One-sided Welch test of H1: mean(a) > mean(b). Returns the p-value.
double welch_one_sided_p(const std::vector<double>& a, const std::vector<double>& b);
/// One-sided paired test of H1: mean(a - b) > 0.
double paired_one_sided_p(const std::vector<double>& a, const std::vector<double>& b);
/// One-sided one-sample test of H1: mean(x) < 0.
double mean_below_zero_p(const std::vector<double>& x);

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
double ks_two_sample_p(std::vector<double> a, std::vector<double> b);

/// Ranks with tie averaging (1-based).
std::vector<double> ranks(const std::vector<double>& x);
/// Spearman rank correlation.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hawkmit::stats
