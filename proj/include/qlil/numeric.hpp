#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

namespace qlil::numeric {

/// Standard normal CDF, Phi(x) = erfc(-x / sqrt 2) / 2.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);

/// One-sample Kolmogorov-Smirnov statistic sup_x |F_n(x) - F(x)|.
/// `sample` need not be sorted.
double ks_statistic(std::span<const double> sample,
                    const std::function<double(double)>& cdf);

/// KS statistic against the standard normal.
double ks_normal(std::span<const double> sample);

/// Adaptive Gauss-Kronrod quadrature on [a, b]; `b` may be +infinity.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

/// 64-bit FNV-1a hash; stable across platforms, used for file naming.
std::uint64_t fnv1a64(std::string_view bytes);

/// Compensated (Neumaier) summation.
double stable_sum(std::span<const double> values);

}  // namespace qlil::numeric
