#pragma once

namespace fademac {

/// Standard normal upper tail Q(x) = P(Z > x).
double normal_upper_tail(double x);

/// Standard normal CDF Phi(x) = 1 - Q(x), computed without cancellation for x < 0.
double normal_cdf(double x);

/// Inverse of normal_cdf on the open interval (0, 1).
///
/// Acklam's rational approximation (relative error ~1.15e-9) refined by two
/// Halley steps against the erfc-based CDF, which brings the absolute error
/// well below 1e-12 across the domain. Throws std::domain_error outside (0, 1).
double normal_quantile(double prob);

} // namespace fademac
