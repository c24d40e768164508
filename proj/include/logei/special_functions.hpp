#pragma once

namespace logei {

// A value standardized by a posterior mean and standard deviation,
// z = (reference - mu) / sigma.
struct StandardizedScore {
  double z;
};

// Standard normal density phi(z) = exp(-z^2/2) / sqrt(2*pi).
// Throws DomainError on non-finite input. Underflows to 0 for |z| > ~38.6.
double normal_pdf(double z);

// Standard normal distribution function Phi(z), evaluated through the
// complementary error function so the deep lower tail keeps full relative
// precision. Underflows to 0 below z ~ -37.5 (the true value drops under
// the smallest subnormal near z = -38.5). Throws DomainError on non-finite
// input.
double normal_cdf(double z);

// log Phi(z), finite for all finite z down to z = -1e4 and beyond.
// Direct evaluation above the crossover z0 = -5; below it, the lower-tail
// Mills ratio from its continued-fraction form. The two branches agree to
// better than 1e-12 at the crossover. Throws DomainError on non-finite
// input.
double log_normal_cdf(double z);

namespace detail {

// Lower-tail Mills ratio Phi(-x) / phi(x) for x > 0, via the Laplace
// continued fraction 1/(x + 1/(x + 2/(x + 3/(x + ...)))). Accurate to a
// few ulp for x >= 5.
double mills_ratio_lower(double x);

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
inline constexpr double kLogSqrt2Pi = 0.9189385332046727417803297;
inline constexpr double kSqrt2 = 1.4142135623730950488016887;

}  // namespace detail

}  // namespace logei
