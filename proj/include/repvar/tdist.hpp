#pragma once

namespace repvar {

/// Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Student t CDF for real dof > 0.
double t_cdf(double dof, double x);

/// Student t density for real dof > 0.
double t_pdf(double dof, double x);

/**
 * Inverse of t_cdf. Brackets the root, then Newton with bisection fallback
 * on the tail probability until |CDF(q) - p| <= 1e-10. Very large dof
 * switch to a Cornish-Fisher expansion about the normal quantile.
 * Throws InvalidProbability unless 0 < p < 1, and for dof <= 0.
 */
double t_quantile(double dof, double p);

/// Standard normal quantile (Wichura AS241).
double normal_quantile(double p);

double normal_cdf(double x);

} // namespace repvar
