#include "logei/bo_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "logei/errors.hpp"
#include "logei/rng.hpp"
#include "logei/special_functions.hpp"

namespace logei {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogDblMax = std::log(std::numeric_limits<double>::max());

// Stream salts so the initial design, candidate pools, and any future
// consumers of the run seed never overlap.
constexpr std::uint64_t kInitStream = 0x11;
constexpr std::uint64_t kCandidateStream = 0x22;

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void SearchSpace::validate() const {
  if (dim < 1) {
    throw DomainError("search space: dimension must be >= 1, got " +
                      std::to_string(dim));
  }
  if (lower.size() != dim || upper.size() != dim) {
    throw ShapeError("search space: bound vectors must have length " +
                     std::to_string(dim));
  }
  for (int d = 0; d < dim; ++d) {
    if (!std::isfinite(lower(d)) || !std::isfinite(upper(d)) ||
        !(lower(d) < upper(d))) {
      throw DomainError("search space: need lower < upper in dimension " +
                        std::to_string(d + 1));
    }
  }
}

bool SearchSpace::contains(const Eigen::VectorXd& x) const {
  if (x.size() != dim) return false;
  for (int d = 0; d < dim; ++d) {
    if (x(d) < lower(d) || x(d) > upper(d)) return false;
  }
  return true;
}

SearchSpace SearchSpace::box(std::vector<double> lo, std::vector<double> hi) {
  SearchSpace s;
  s.dim = static_cast<int>(lo.size());
  s.lower = Eigen::Map<Eigen::VectorXd>(lo.data(), s.dim);
  s.upper = Eigen::Map<Eigen::VectorXd>(hi.data(), static_cast<int>(hi.size()));
  s.validate();
  return s;
}

void BOConfig::validate() const {
  if (init_design_size < 1) {
    throw DomainError("bo config: init_design_size must be >= 1");
  }
  if (max_evaluations <= init_design_size) {
    throw DomainError("bo config: max_evaluations must exceed "
                      "init_design_size");
  }
  if (candidate_pool < 1) {
    throw DomainError("bo config: candidate_pool must be >= 1");
  }
  if (local_refinement_steps < 0) {
    throw DomainError("bo config: local_refinement_steps must be >= 0");
  }
  if (tune_budget < 1) {
    throw DomainError("bo config: tune_budget must be >= 1");
  }
}

double improvement_score(const GPModel& model, const Eigen::VectorXd& x,
                         double y_star, AcquisitionVariant variant) {
  const PosteriorGaussian post = model.predict(x);
  if (variant == AcquisitionVariant::LogTransformedEi) {
    // Posterior is over l = log y. Expected amount by which exp(l) exceeds
    // y_star, from the same completed-square pieces as the closed form,
    // assembled in log space so far-tail candidates still rank correctly.
    if (post.sigma == 0.0) {
      return std::max(std::exp(post.mu) - y_star, 0.0);
    }
    const double z = (std::log(y_star) - post.mu) / post.sigma;
    const double e1 = post.mu + 0.5 * post.sigma * post.sigma +
                      log_normal_cdf(post.sigma - z);
    const double t1 = e1 > kLogDblMax ? std::numeric_limits<double>::max()
                                      : std::exp(e1);
    return t1 - y_star * std::exp(log_normal_cdf(-z));
  }
  // Plain-target variants rank by log E[max(y - y_star, 0)], the reflected
  // stable form; the log scale keeps far-apart candidates comparable.
  if (post.sigma == 0.0) {
    return post.mu > y_star ? std::log(post.mu - y_star) : kNegInf;
  }
  return log_of_ei_stable({-post.mu, post.sigma}, {-y_star}).value;
}

namespace {

// The value stored into TrialRecord: the improvement score on the scale
// native to the variant (linear for Ei, log for LogOfEi).
double record_value(const GPModel& model, const Eigen::VectorXd& x,
                    double y_star, AcquisitionVariant variant) {
  if (variant == AcquisitionVariant::Ei) {
    const PosteriorGaussian post = model.predict(x);
    return ei_closed({-post.mu, post.sigma}, {-y_star}).value;
  }
  return improvement_score(model, x, y_star, variant);
}

Eigen::VectorXd uniform_point(SeededRng& rng, const SearchSpace& space) {
  Eigen::VectorXd x(space.dim);
  for (int d = 0; d < space.dim; ++d) {
    x(d) = rng.uniform_in(space.lower(d), space.upper(d));
  }
  return x;
}

double clamp_to(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

}  // namespace

SuggestDetail suggest_detail(const Dataset& history, const SearchSpace& space,
                             const BOConfig& config) {
  space.validate();
  config.validate();
  if (history.dim() != space.dim) {
    throw ShapeError("suggest: history dimension " +
                     std::to_string(history.dim()) +
                     " does not match the search space");
  }
  const int i = history.size();
  if (i >= config.max_evaluations) {
    throw DomainError("suggest: history already holds max_evaluations "
                      "observations");
  }

  SuggestDetail out;
  if (i < config.init_design_size) {
    SeededRng rng(mix_seed(config.seed, kInitStream + 64 * i));
    out.x = uniform_point(rng, space);
    out.selection_score = std::numeric_limits<double>::quiet_NaN();
    out.acq_value = std::numeric_limits<double>::quiet_NaN();
    out.from_init = true;
    return out;
  }

  // The canonical ordering makes everything downstream independent of the
  // order observations arrived in.
  const Dataset canon = history.sorted();
  const bool log_targets =
      config.acquisition == AcquisitionVariant::LogTransformedEi;
  const GPHyperparams hp =
      tune_hyperparams(canon, log_targets, config.tune_budget);
  const GPModel model = fit(canon, hp, log_targets);
  const double y_star = canon.targets().maxCoeff();

  SeededRng rng(mix_seed(config.seed, kCandidateStream + 64 * i));
  std::vector<Eigen::VectorXd> candidates;
  candidates.reserve(static_cast<std::size_t>(config.candidate_pool) + 24);
  for (int c = 0; c < config.candidate_pool; ++c) {
    candidates.push_back(uniform_point(rng, space));
  }
  // Local exploitation anchors: jitter around the best observed points.
  std::vector<int> order(static_cast<std::size_t>(canon.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return canon.target(a) > canon.target(b);
  });
  const Eigen::VectorXd span = space.upper - space.lower;
  const int anchors = std::min(3, canon.size());
  for (int a = 0; a < anchors; ++a) {
    const Eigen::VectorXd center = canon.input(order[static_cast<std::size_t>(a)]);
    for (int k = 0; k < 8; ++k) {
      Eigen::VectorXd x(space.dim);
      for (int d = 0; d < space.dim; ++d) {
        x(d) = clamp_to(center(d) + 0.05 * span(d) * rng.normal(),
                        space.lower(d), space.upper(d));
      }
      candidates.push_back(std::move(x));
    }
  }

  out.candidate_scores.reserve(candidates.size());
  Eigen::VectorXd best = candidates.front();
  double best_score = improvement_score(model, best, y_star,
                                        config.acquisition);
  out.candidate_scores.push_back(best_score);
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const double s =
        improvement_score(model, candidates[c], y_star, config.acquisition);
    out.candidate_scores.push_back(s);
    if (s > best_score) {
      best_score = s;
      best = candidates[c];
    }
  }

  double step_scale = 0.1;
  for (int round = 0; round < config.local_refinement_steps; ++round) {
    for (int d = 0; d < space.dim; ++d) {
      for (const double dir : {+1.0, -1.0}) {
        Eigen::VectorXd probe = best;
        probe(d) = clamp_to(best(d) + dir * step_scale * span(d),
                            space.lower(d), space.upper(d));
        if (probe(d) == best(d)) continue;
        const double s =
            improvement_score(model, probe, y_star, config.acquisition);
        if (s > best_score) {
          best_score = s;
          best = probe;
        }
      }
    }
    step_scale *= 0.5;
  }

  out.x = best;
  out.selection_score = best_score;
  out.acq_value = record_value(model, best, y_star, config.acquisition);
  out.from_init = false;
  return out;
}

Eigen::VectorXd suggest(const Dataset& history, const SearchSpace& space,
                        const BOConfig& config) {
  return suggest_detail(history, space, config).x;
}

std::vector<TrialRecord> run(const Objective& objective,
                             const SearchSpace& space, const BOConfig& config,
                             const TrialSink& sink) {
  space.validate();
  config.validate();
  std::vector<TrialRecord> records;
  records.reserve(static_cast<std::size_t>(config.max_evaluations));
  Dataset history(space.dim);
  double incumbent = kNegInf;
  for (int iter = 0; iter < config.max_evaluations; ++iter) {
    const SuggestDetail det = suggest_detail(history, space, config);
    const auto t0 = std::chrono::steady_clock::now();
    const double y = objective(det.x);
    const auto t1 = std::chrono::steady_clock::now();
    if (!std::isfinite(y)) {
      std::ostringstream msg;
      msg << "run: objective returned a non-finite value at iteration "
          << iter + 1 << "; the " << iter
          << " completed records were already emitted";
      throw NumericError(msg.str());
    }
    if (config.acquisition == AcquisitionVariant::LogTransformedEi &&
        y <= 0.0) {
      std::ostringstream msg;
      msg << "run: the log-transformed variant requires a positive "
             "objective, got y = " << y << " at iteration " << iter + 1;
      throw DomainError(msg.str());
    }
    incumbent = std::max(incumbent, y);
    TrialRecord rec;
    rec.iteration = iter + 1;
    rec.x = det.x;
    rec.y = y;
    rec.incumbent_so_far = incumbent;
    rec.acquisition_value_at_x = det.acq_value;
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      t1 - t0).count();
    if (sink) sink(rec);
    records.push_back(rec);
    history.add(det.x, y);
  }
  return records;
}

std::vector<TrialRecord> run(const Objective& objective,
                             const SearchSpace& space,
                             const BOConfig& config) {
  return run(objective, space, config, TrialSink());
}

std::string trial_to_jsonl(const TrialRecord& record) {
  std::ostringstream out;
  out << "{\"iter\":" << record.iteration << ",\"x\":[";
  for (int d = 0; d < record.x.size(); ++d) {
    if (d > 0) out << ',';
    out << format17(record.x(d));
  }
  out << "],\"y\":" << format17(record.y)
      << ",\"incumbent\":" << format17(record.incumbent_so_far) << ",\"acq\":";
  if (std::isfinite(record.acquisition_value_at_x)) {
    out << format17(record.acquisition_value_at_x);
  } else {
    out << "null";
  }
  out << ",\"wall_ms\":" << record.wall_ms << '}';
  return out.str();
}

}  // namespace logei
