#include "logei/oracle.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "logei/errors.hpp"
#include "logei/rng.hpp"
#include "logei/special_functions.hpp"

namespace logei {

namespace {

// Width of the kept integration window, in standard deviations; the
// neglected normal mass beyond it is below 2e-33.
constexpr double kTailWidth = 12.0;

const double kLogDblMax = std::log(std::numeric_limits<double>::max());

void require_positive_sigma(const PosteriorGaussian& post, const char* fn) {
  if (!std::isfinite(post.mu) || !std::isfinite(post.sigma)) {
    throw DomainError(std::string(fn) + ": posterior must be finite");
  }
  if (post.sigma <= 0.0) {
    throw DomainError(std::string(fn) + ": sigma must be > 0, got " +
                      std::to_string(post.sigma));
  }
}

// integral of f over [lo, hi], split into unit-width panels with an n-point
// Gauss-Legendre rule on each.
template <typename F>
double panel_integrate(F&& f, double lo, double hi, int n) {
  if (!(hi > lo)) return 0.0;
  const auto& [nodes, weights] = detail::gauss_legendre_rule(n);
  const int panels = static_cast<int>(std::ceil(hi - lo));
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    const double mid = a + 0.5 * width;
    const double half = 0.5 * width;
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      acc += weights[i] * f(mid + half * nodes[i]);
    }
    total += half * acc;
  }
  return total;
}

}  // namespace

void QuadratureConfig::validate() const {
  if (node_count < 16) {
    throw DomainError("quadrature config: node_count must be >= 16, got " +
                      std::to_string(node_count));
  }
  if (mc_samples < 10000) {
    throw DomainError("quadrature config: mc_samples must be >= 10000, got " +
                      std::to_string(mc_samples));
  }
}

namespace detail {

const std::pair<std::vector<double>, std::vector<double>>&
gauss_legendre_rule(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<
      const std::pair<std::vector<double>, std::vector<double>>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;

  std::vector<double> nodes(static_cast<std::size_t>(n));
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = x;
    weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  auto rule = std::make_unique<
      const std::pair<std::vector<double>, std::vector<double>>>(
      std::move(nodes), std::move(weights));
  const auto& ref = *rule;
  cache.emplace(n, std::move(rule));
  return ref;
}

}  // namespace detail

double ei_integral_quadrature(const PosteriorGaussian& post,
                              const Incumbent& inc,
                              const QuadratureConfig& cfg) {
  require_positive_sigma(post, "ei_integral_quadrature");
  if (!std::isfinite(inc.y_star)) {
    throw DomainError("ei_integral_quadrature: incumbent must be finite");
  }
  cfg.validate();
  const double z = (inc.y_star - post.mu) / post.sigma;
  // All integrable mass of (z - u) phi(u) sits within kTailWidth of the
  // normal bulk; cap the window there on both sides.
  const double lo = std::min(z, 0.0) - kTailWidth;
  const double hi = std::min(z, kTailWidth);
  const double integral = panel_integrate(
      [&](double u) { return (z - u) * normal_pdf(u); }, lo, hi,
      cfg.node_count);
  return post.sigma * integral;
}

double ei_integral_quadrature_yspace(const PosteriorGaussian& post,
                                     const Incumbent& inc,
                                     const QuadratureConfig& cfg) {
  require_positive_sigma(post, "ei_integral_quadrature_yspace");
  if (!std::isfinite(inc.y_star)) {
    throw DomainError(
        "ei_integral_quadrature_yspace: incumbent must be finite");
  }
  cfg.validate();
  const double lo = std::min(inc.y_star, post.mu) - kTailWidth * post.sigma;
  const double hi = std::min(inc.y_star, post.mu + kTailWidth * post.sigma);
  return panel_integrate(
      [&](double y) {
        const double u = (y - post.mu) / post.sigma;
        return (inc.y_star - y) * normal_pdf(u) / post.sigma;
      },
      lo, hi, cfg.node_count);
}

double log_ei_integral_quadrature(const PosteriorGaussian& post,
                                  const Incumbent& inc,
                                  const QuadratureConfig& cfg) {
  require_positive_sigma(post, "log_ei_integral_quadrature");
  if (!(inc.y_star > 0.0) || !std::isfinite(inc.y_star)) {
    throw DomainError("log_ei_integral_quadrature: incumbent must be > 0");
  }
  cfg.validate();
  const double z = (std::log(inc.y_star) - post.mu) / post.sigma;
  const double lo = std::min(z, 0.0) - kTailWidth;
  const double hi = std::min(z, kTailWidth);
  if (post.mu + post.sigma * hi > kLogDblMax) {
    std::ostringstream msg;
    msg << "log_ei_integral_quadrature: exp(mu + u sigma) overflows at the "
           "upper panel edge u = " << hi;
    throw OverflowError(msg.str());
  }
  return panel_integrate(
      [&](double u) {
        return (inc.y_star - std::exp(post.mu + u * post.sigma)) *
               normal_pdf(u);
      },
      lo, hi, cfg.node_count);
}

double exp_weighted_tail_integral(double sigma, double z,
                                  const QuadratureConfig& cfg) {
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw DomainError("exp_weighted_tail_integral: sigma must be > 0");
  }
  if (!std::isfinite(z)) {
    throw DomainError("exp_weighted_tail_integral: z must be finite");
  }
  cfg.validate();
  // exp(u sigma) phi(u) is a Gaussian bump centered at u = sigma.
  const double lo = std::min(z, sigma) - kTailWidth;
  const double hi = std::min(z, sigma + kTailWidth);
  if (sigma * hi > kLogDblMax) {
    throw OverflowError(
        "exp_weighted_tail_integral: exp(u sigma) overflows at the upper "
        "panel edge");
  }
  return panel_integrate(
      [&](double u) { return std::exp(u * sigma) * normal_pdf(u); }, lo, hi,
      cfg.node_count);
}

McEstimate ei_integral_mc(const PosteriorGaussian& post, const Incumbent& inc,
                          const QuadratureConfig& cfg,
                          AcquisitionVariant variant) {
  require_positive_sigma(post, "ei_integral_mc");
  if (!std::isfinite(inc.y_star)) {
    throw DomainError("ei_integral_mc: incumbent must be finite");
  }
  if (variant == AcquisitionVariant::LogOfEi) {
    throw DomainError(
        "ei_integral_mc: log-of-EI has no integral form of its own; sample "
        "the plain variant and take the log");
  }
  if (variant == AcquisitionVariant::LogTransformedEi && inc.y_star <= 0.0) {
    throw DomainError("ei_integral_mc: logei requires incumbent > 0");
  }
  cfg.validate();
  SeededRng rng(cfg.mc_seed);
  const bool log_variant = variant == AcquisitionVariant::LogTransformedEi;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long long i = 0; i < cfg.mc_samples; ++i) {
    const double draw = post.mu + post.sigma * rng.normal();
    const double value = log_variant ? inc.y_star - std::exp(draw)
                                     : inc.y_star - draw;
    const double imp = value > 0.0 ? value : 0.0;
    sum += imp;
    sum_sq += imp * imp;
  }
  const double m = static_cast<double>(cfg.mc_samples);
  const double mean = sum / m;
  const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
  return {mean, std::sqrt(var / m)};
}

}  // namespace logei
