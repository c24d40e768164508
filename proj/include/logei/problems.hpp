#pragma once

#include <functional>
#include <string>
#include <vector>

#include "logei/bo_loop.hpp"

namespace logei {

// A benchmark objective: maximized over its box, strictly positive
// everywhere so the log-transformed variant applies, with a known optimum
// recorded for acceptance checks.
struct Problem {
  std::string name;
  SearchSpace space;
  std::function<double(const Eigen::VectorXd&)> objective;
  double optimum = 0.0;
};

const std::vector<Problem>& builtin_problems();

// Throws DomainError listing the available names when unknown.
const Problem& problem_by_name(const std::string& name);

}  // namespace logei
