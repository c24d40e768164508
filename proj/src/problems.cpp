#include "logei/problems.hpp"

#include <cmath>
#include <sstream>

#include "logei/errors.hpp"

namespace logei {

namespace {

double quad1d(const Eigen::VectorXd& x) {
  const double d = x(0) - 0.3;
  return 1.0 - d * d;
}

double quad2d(const Eigen::VectorXd& x) {
  const double d0 = x(0) - 0.3;
  const double d1 = x(1) - 0.7;
  return 1.0 - d0 * d0 - d1 * d1;
}

// Branin-Hoo in its standard parameterization, negated and shifted up so
// the problem is maximized and strictly positive over the box.
double posbranin(const Eigen::VectorXd& x) {
  const double a = 1.0;
  const double b = 5.1 / (4.0 * M_PI * M_PI);
  const double c = 5.0 / M_PI;
  const double r = 6.0;
  const double s = 10.0;
  const double t = 1.0 / (8.0 * M_PI);
  const double inner = x(1) - b * x(0) * x(0) + c * x(0) - r;
  const double branin = a * inner * inner + s * (1.0 - t) * std::cos(x(0)) + s;
  return 309.0 - branin;
}

std::vector<Problem> make_problems() {
  std::vector<Problem> out;
  out.push_back({"quad1d", SearchSpace::box({0.0}, {1.0}), quad1d, 1.0});
  out.push_back(
      {"quad2d", SearchSpace::box({0.0, 0.0}, {1.0, 1.0}), quad2d, 1.0});
  out.push_back({"posbranin", SearchSpace::box({-5.0, 0.0}, {10.0, 15.0}),
                 posbranin, 309.0 - 0.39788735772973816});
  return out;
}

}  // namespace

const std::vector<Problem>& builtin_problems() {
  static const std::vector<Problem> problems = make_problems();
  return problems;
}

const Problem& problem_by_name(const std::string& name) {
  for (const auto& p : builtin_problems()) {
    if (p.name == name) return p;
  }
  std::ostringstream msg;
  msg << "unknown problem '" << name << "'; available:";
  for (const auto& p : builtin_problems()) {
    msg << ' ' << p.name;
  }
  throw DomainError(msg.str());
}

}  // namespace logei
