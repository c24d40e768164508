#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "logei/acquisition.hpp"

namespace logei {

struct QuadratureConfig {
  int node_count = 32;            // Gauss-Legendre nodes per unit panel
  long long mc_samples = 100000;  // Monte Carlo draws
  std::uint64_t mc_seed = 0;

  void validate() const;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Name recorded in run metadata for the MC estimator's generator.
inline constexpr const char* kMcGeneratorName = "mt19937_64-polar";

// Numerical evaluation of the defining improvement integral over the
// standardized variable u = (y - mu)/sigma, truncated 12 standard deviations
// into the tail.
double ei_integral_quadrature(const PosteriorGaussian& post,
                              const Incumbent& inc,
                              const QuadratureConfig& cfg);

// The same integral evaluated directly in y-space (no substitution); the
// two must agree, which checks the change of variables numerically.
double ei_integral_quadrature_yspace(const PosteriorGaussian& post,
                                     const Incumbent& inc,
                                     const QuadratureConfig& cfg);

// Improvement integral for a posterior over l = log y: the integrand keeps
// y* - exp(mu + u sigma) in the original objective scale.
double log_ei_integral_quadrature(const PosteriorGaussian& post,
                                  const Incumbent& inc,
                                  const QuadratureConfig& cfg);

// integral of exp(u sigma) phi(u) du over u <= z: the left side of the
// completing-the-square identity exp(sigma^2/2) Phi(z - sigma).
double exp_weighted_tail_integral(double sigma, double z,
                                  const QuadratureConfig& cfg);

// Monte Carlo estimate of the improvement integral; variant selects the
// plain (Ei) or log-transformed (LogTransformedEi) integrand.
McEstimate ei_integral_mc(const PosteriorGaussian& post, const Incumbent& inc,
                          const QuadratureConfig& cfg,
                          AcquisitionVariant variant);

namespace detail {

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1];
// cached per n, thread-safe.
const std::pair<std::vector<double>, std::vector<double>>&
gauss_legendre_rule(int n);

}  // namespace detail

}  // namespace logei
