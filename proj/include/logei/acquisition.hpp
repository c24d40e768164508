#pragma once

#include <string>

#include "logei/special_functions.hpp"

namespace logei {

class Dataset;

// Gaussian posterior (mu, sigma) predicted at a query point; the sole input
// to every closed-form acquisition value.
struct PosteriorGaussian {
  double mu = 0.0;
  double sigma = 0.0;
};

// Reference objective value against which improvement is measured.
struct Incumbent {
  double y_star = 0.0;
};

enum class AcquisitionVariant {
  // Expected improvement: alpha = (y* - mu) Phi(z) + sigma phi(z),
  // z = (y* - mu) / sigma.
  Ei,
  // Expected improvement when the surrogate models log y:
  // alpha = y* Phi(z) - exp(mu + sigma^2/2) Phi(z - sigma),
  // z = (log y* - mu) / sigma. Requires y* > 0 and a log-space posterior.
  LogTransformedEi,
  // log of the plain expected improvement value, computed without
  // intermediate underflow; a different function from LogTransformedEi.
  LogOfEi,
};

const char* to_string(AcquisitionVariant v);
AcquisitionVariant acquisition_variant_from_string(const std::string& name);

struct AcquisitionSpec {
  AcquisitionVariant variant = AcquisitionVariant::Ei;
  Incumbent incumbent;

  // Throws DomainError if the variant's incumbent precondition fails.
  void validate() const;
};

struct AcquisitionValue {
  double value = 0.0;
  // True when the linear-scale acquisition is positive in exact arithmetic
  // but below double-precision range.
  bool underflowed = false;
};

// Closed-form expected improvement. sigma = 0 returns the degenerate limit
// max(y* - mu, 0). Result is clamped to >= 0; negativity beyond -1e-15 is a
// NumericError.
AcquisitionValue ei_closed(const PosteriorGaussian& post, const Incumbent& inc);

// Closed-form EI for a surrogate trained on log y. `post` must be the
// posterior of the log objective. sigma = 0 returns max(y* - exp(mu), 0).
// Throws DomainError for y* <= 0, OverflowError when mu + sigma^2/2 exceeds
// the representable exponent range, NumericError for negativity beyond
// -1e-12 * y*.
AcquisitionValue log_transformed_ei_closed(const PosteriorGaussian& post,
                                           const Incumbent& inc);

// log of ei_closed, evaluated without intermediate underflow. Finite for
// z = (y* - mu)/sigma down to -1e4. sigma = 0 is a DomainError: the log of a
// possibly-zero value is the caller's branch.
AcquisitionValue log_of_ei_stable(const PosteriorGaussian& post,
                                  const Incumbent& inc);

// (inc_value - mu) / sigma. sigma = 0 is a DomainError; callers must take
// the degenerate branch before standardizing.
StandardizedScore standardize(double inc_value, const PosteriorGaussian& post);

// The incumbent y* = max_n y_n, in the original objective scale for every
// variant. For LogTransformedEi all observations must be positive.
Incumbent incumbent_from(const Dataset& data, AcquisitionVariant variant);

// Dispatch on spec.variant. For LogOfEi the posterior must have sigma > 0.
AcquisitionValue evaluate_acquisition(const AcquisitionSpec& spec,
                                      const PosteriorGaussian& post);

}  // namespace logei
