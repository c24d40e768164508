#include "logei/special_functions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "logei/errors.hpp"

namespace logei {

namespace {

void require_finite(double z, const char* fn) {
  if (!std::isfinite(z)) {
    throw DomainError(std::string(fn) + ": input must be finite, got " +
                      std::to_string(z));
  }
}

// Crossover between direct log(Phi) and the continued-fraction tail.
constexpr double kTailCrossover = -5.0;

}  // namespace

double normal_pdf(double z) {
  require_finite(z, "normal_pdf");
  return detail::kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) {
  require_finite(z, "normal_cdf");
  return 0.5 * std::erfc(-z / detail::kSqrt2);
}

double detail::mills_ratio_lower(double x) {
  // Modified Lentz on R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))).
  constexpr double tiny = 1e-300;
  double f = tiny;
  double c = f;
  double d = 0.0;
  for (int j = 1; j <= 500; ++j) {
    const double a = (j == 1) ? 1.0 : static_cast<double>(j - 1);
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return f;
}

double log_normal_cdf(double z) {
  require_finite(z, "log_normal_cdf");
  if (z >= 0.0) {
    // Phi(-z) is tiny or moderate; log1p keeps precision near Phi = 1.
    return std::log1p(-0.5 * std::erfc(z / detail::kSqrt2));
  }
  if (z >= kTailCrossover) {
    return std::log(0.5 * std::erfc(-z / detail::kSqrt2));
  }
  // Deep tail: Phi(z) = phi(z) * R(-z), evaluated entirely in log space so
  // nothing underflows down to z = -1e4 and below.
  const double x = -z;
  return -0.5 * z * z - detail::kLogSqrt2Pi +
         std::log(detail::mills_ratio_lower(x));
}

}  // namespace logei
