#pragma once

#include <cstddef>
#include <vector>

namespace semrex::stats {

double mean(const std::vector<double>& xs);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(const std::vector<double>& xs);

/// Quantile with linear interpolation between order statistics (type 7).
double quantile(std::vector<double> xs, double p);
double median(const std::vector<double>& xs);

/// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

/// P(T > t) for Student's t with `df` degrees of freedom.
double student_t_upper(double t, double df);

}  // namespace semrex::stats
