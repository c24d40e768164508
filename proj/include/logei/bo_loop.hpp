#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "logei/acquisition.hpp"
#include "logei/gp.hpp"

namespace logei {

struct SearchSpace {
  int dim = 0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  void validate() const;
  bool contains(const Eigen::VectorXd& x) const;

  static SearchSpace box(std::vector<double> lo, std::vector<double> hi);
};

struct BOConfig {
  AcquisitionVariant acquisition = AcquisitionVariant::Ei;
  int init_design_size = 6;
  int max_evaluations = 30;
  int candidate_pool = 256;
  int local_refinement_steps = 16;
  int tune_budget = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrialRecord {
  int iteration = 0;  // 1-based
  Eigen::VectorXd x;
  double y = 0.0;
  double incumbent_so_far = 0.0;
  // The loop's improvement score at x; NaN for initial-design iterations
  // (no model exists yet). Log scale for the LogOfEi variant.
  double acquisition_value_at_x = 0.0;
  long long wall_ms = 0;  // objective evaluation time, floored to ms
};

struct SuggestDetail {
  Eigen::VectorXd x;
  double selection_score = 0.0;  // what the candidate search maximized
  double acq_value = 0.0;        // value recorded into TrialRecord
  bool from_init = false;
  std::vector<double> candidate_scores;  // pool scores, pre-refinement
};

// Next point to evaluate: the seeded initial design while history is short,
// then the improvement-score argmax over a random candidate pool refined by
// coordinate-wise hill climbing. Deterministic given (config.seed, history
// contents); the observation order of history does not matter.
Eigen::VectorXd suggest(const Dataset& history, const SearchSpace& space,
                        const BOConfig& config);
SuggestDetail suggest_detail(const Dataset& history, const SearchSpace& space,
                             const BOConfig& config);

// The selection score suggest maximizes: expected improvement of a new
// observation over y_star = max y_n under the model's posterior at x, on
// the scale native to the variant (log scale for Ei/LogOfEi candidate
// ranking; original scale for LogTransformedEi). Exposed for tests.
double improvement_score(const GPModel& model, const Eigen::VectorXd& x,
                         double y_star, AcquisitionVariant variant);

using Objective = std::function<double(const Eigen::VectorXd&)>;
using TrialSink = std::function<void(const TrialRecord&)>;

// Full ask-evaluate-tell loop for config.max_evaluations steps. The sink,
// when given, receives each record as it completes (it has seen every
// finished iteration if the run aborts on a non-finite objective value).
std::vector<TrialRecord> run(const Objective& objective,
                             const SearchSpace& space, const BOConfig& config);
std::vector<TrialRecord> run(const Objective& objective,
                             const SearchSpace& space, const BOConfig& config,
                             const TrialSink& sink);

// One JSONL line (no trailing newline): keys iter, x, y, incumbent, acq,
// wall_ms; doubles as 17-significant-digit text; non-finite acq -> null.
std::string trial_to_jsonl(const TrialRecord& record);

}  // namespace logei
