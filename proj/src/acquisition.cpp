#include "logei/acquisition.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "logei/errors.hpp"
#include "logei/gp.hpp"

namespace logei {

namespace {

constexpr double kEiClampFloor = -1e-15;
// z below which z*Phi(z) + phi(z) switches to the Mills-ratio tail form.
constexpr double kStableTailCrossover = -5.0;

const double kLogDblMax = std::log(std::numeric_limits<double>::max());
const double kLogDblMin = std::log(std::numeric_limits<double>::min());

void require_finite_posterior(const PosteriorGaussian& post, const char* fn) {
  if (!std::isfinite(post.mu) || !std::isfinite(post.sigma)) {
    throw DomainError(std::string(fn) + ": posterior must be finite");
  }
  if (post.sigma < 0.0) {
    throw DomainError(std::string(fn) + ": sigma must be >= 0, got " +
                      std::to_string(post.sigma));
  }
}

void require_finite_incumbent(const Incumbent& inc, const char* fn) {
  if (!std::isfinite(inc.y_star)) {
    throw DomainError(std::string(fn) + ": incumbent must be finite");
  }
}

// z*Phi(z) + phi(z), the dimensionless EI factor.
double ei_factor(double z) {
  return z * normal_cdf(z) + normal_pdf(z);
}

}  // namespace

const char* to_string(AcquisitionVariant v) {
  switch (v) {
    case AcquisitionVariant::Ei:
      return "ei";
    case AcquisitionVariant::LogTransformedEi:
      return "logei";
    case AcquisitionVariant::LogOfEi:
      return "logofei";
  }
  return "unknown";
}

AcquisitionVariant acquisition_variant_from_string(const std::string& name) {
  if (name == "ei") return AcquisitionVariant::Ei;
  if (name == "logei") return AcquisitionVariant::LogTransformedEi;
  if (name == "logofei") return AcquisitionVariant::LogOfEi;
  throw DomainError("unknown acquisition variant '" + name +
                    "' (expected ei, logei, or logofei)");
}

void AcquisitionSpec::validate() const {
  if (!std::isfinite(incumbent.y_star)) {
    throw DomainError("acquisition spec: incumbent must be finite");
  }
  if (variant == AcquisitionVariant::LogTransformedEi &&
      incumbent.y_star <= 0.0) {
    throw DomainError("acquisition spec: logei requires incumbent > 0, got " +
                      std::to_string(incumbent.y_star));
  }
}

AcquisitionValue ei_closed(const PosteriorGaussian& post,
                           const Incumbent& inc) {
  require_finite_posterior(post, "ei_closed");
  require_finite_incumbent(inc, "ei_closed");
  const double delta = inc.y_star - post.mu;
  if (post.sigma == 0.0) {
    return {std::max(delta, 0.0), false};
  }
  const double z = delta / post.sigma;
  double value = delta * normal_cdf(z) + post.sigma * normal_pdf(z);
  if (value < 0.0) {
    if (value < kEiClampFloor) {
      throw NumericError("ei_closed: value " + std::to_string(value) +
                         " below the round-off clamp");
    }
    value = 0.0;
  }
  return {value, value == 0.0};
}

AcquisitionValue log_transformed_ei_closed(const PosteriorGaussian& post,
                                           const Incumbent& inc) {
  require_finite_posterior(post, "log_transformed_ei_closed");
  require_finite_incumbent(inc, "log_transformed_ei_closed");
  if (inc.y_star <= 0.0) {
    throw DomainError("log_transformed_ei_closed: incumbent must be > 0, got " +
                      std::to_string(inc.y_star));
  }
  if (post.sigma == 0.0) {
    return {std::max(inc.y_star - std::exp(post.mu), 0.0), false};
  }
  // Single rounding of the exponent, with an explicit overflow surface.
  const double exponent = post.mu + 0.5 * post.sigma * post.sigma;
  if (exponent > kLogDblMax) {
    std::ostringstream msg;
    msg << "log_transformed_ei_closed: mu + sigma^2/2 = " << exponent
        << " exceeds the representable exponent " << kLogDblMax;
    throw OverflowError(msg.str());
  }
  const double z = (std::log(inc.y_star) - post.mu) / post.sigma;
  double value = inc.y_star * normal_cdf(z) -
                 std::exp(exponent) * normal_cdf(z - post.sigma);
  if (value < 0.0) {
    if (value < -1e-12 * inc.y_star) {
      throw NumericError("log_transformed_ei_closed: value " +
                         std::to_string(value) +
                         " below the round-off clamp");
    }
    value = 0.0;
  }
  return {value, value == 0.0};
}

AcquisitionValue log_of_ei_stable(const PosteriorGaussian& post,
                                  const Incumbent& inc) {
  require_finite_posterior(post, "log_of_ei_stable");
  require_finite_incumbent(inc, "log_of_ei_stable");
  if (post.sigma == 0.0) {
    throw DomainError(
        "log_of_ei_stable: sigma = 0 (the log of a possibly-zero value is the "
        "caller's branch)");
  }
  const double z = (inc.y_star - post.mu) / post.sigma;
  double log_factor;
  if (z >= kStableTailCrossover) {
    log_factor = std::log(ei_factor(z));
  } else {
    // z*Phi(z) + phi(z) = phi(z) * (1 + z * Phi(z)/phi(z)); the tail ratio
    // from its continued-fraction form, everything else in log space.
    const double ratio = detail::mills_ratio_lower(-z);
    log_factor = -0.5 * z * z - detail::kLogSqrt2Pi + std::log1p(z * ratio);
  }
  const double value = std::log(post.sigma) + log_factor;
  return {value, value < kLogDblMin};
}

StandardizedScore standardize(double inc_value, const PosteriorGaussian& post) {
  require_finite_posterior(post, "standardize");
  if (!std::isfinite(inc_value)) {
    throw DomainError("standardize: value must be finite");
  }
  if (post.sigma == 0.0) {
    throw DomainError(
        "standardize: sigma = 0 (take the degenerate branch before "
        "standardizing)");
  }
  return {(inc_value - post.mu) / post.sigma};
}

Incumbent incumbent_from(const Dataset& data, AcquisitionVariant variant) {
  if (data.size() == 0) {
    throw DomainError("incumbent_from: dataset is empty");
  }
  if (variant == AcquisitionVariant::LogTransformedEi) {
    for (int n = 0; n < data.size(); ++n) {
      if (data.target(n) <= 0.0) {
        throw DomainError("incumbent_from: logei requires positive targets; "
                          "observation " + std::to_string(n + 1) + " has y = " +
                          std::to_string(data.target(n)));
      }
    }
  }
  return {data.targets().maxCoeff()};
}

AcquisitionValue evaluate_acquisition(const AcquisitionSpec& spec,
                                      const PosteriorGaussian& post) {
  spec.validate();
  switch (spec.variant) {
    case AcquisitionVariant::Ei:
      return ei_closed(post, spec.incumbent);
    case AcquisitionVariant::LogTransformedEi:
      return log_transformed_ei_closed(post, spec.incumbent);
    case AcquisitionVariant::LogOfEi:
      return log_of_ei_stable(post, spec.incumbent);
  }
  throw DomainError("evaluate_acquisition: unknown variant");
}

}  // namespace logei
