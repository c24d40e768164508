// Acceptance gate: one pass/fail line per criterion, exit 1 on any failure.
// Every closed form is judged against the independent numerical oracles.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logei/acquisition.hpp"
#include "logei/bo_loop.hpp"
#include "logei/gp.hpp"
#include "logei/oracle.hpp"
#include "logei/problems.hpp"
#include "logei/rng.hpp"
#include "logei/special_functions.hpp"
#include "oracle_reference.hpp"
#include "test_support.hpp"

using namespace logei;
using testing::format17;
using testing::rel_err;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& outcome, const std::string& detail) {
  if (outcome.pass) {
    outcome.pass = false;
    outcome.detail = detail;
  }
}

long long ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

const std::vector<double> kMuGrid = {-3, -2, -1, 0, 1, 2, 3};
const std::vector<double> kSigmaGrid = {0.1, 0.5, 1, 2, 5};

// 1. Closed-form EI vs the quadrature oracle over the reference grid.
Outcome ei_grid_vs_quadrature() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome outcome;
  const QuadratureConfig cfg;
  double worst = 0.0;
  for (const double mu : kMuGrid) {
    for (const double sigma : kSigmaGrid) {
      for (const double ystar : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        const double closed = ei_closed({mu, sigma}, {ystar}).value;
        const double quad = ei_integral_quadrature({mu, sigma}, {ystar}, cfg);
        const double rel = rel_err(closed, quad);
        worst = std::max(worst, rel);
        if (rel > 1e-8 && std::abs(closed - quad) > 1e-12) {
          fail(outcome, "mu=" + format17(mu) + " sigma=" + format17(sigma) +
                            " y*=" + format17(ystar) + " rel=" +
                            format17(rel));
        }
      }
    }
  }
  const long long elapsed = ms_since(t0);
  if (elapsed >= 5000) {
    fail(outcome, "grid took " + std::to_string(elapsed) + " ms (budget 5s)");
  }
  if (outcome.pass) {
    outcome.detail = "max rel " + format17(worst) + ", " +
                     std::to_string(elapsed) + " ms";
  }
  return outcome;
}

// 2. Closed-form log-transformed EI vs its quadrature oracle.
Outcome logei_grid_vs_quadrature() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome outcome;
  const QuadratureConfig cfg;
  double worst = 0.0;
  for (const double mu : kMuGrid) {
    for (const double sigma : kSigmaGrid) {
      for (const double ystar : {0.1, 0.5, 1.0, 2.0, 10.0}) {
        const double closed =
            log_transformed_ei_closed({mu, sigma}, {ystar}).value;
        const double quad =
            log_ei_integral_quadrature({mu, sigma}, {ystar}, cfg);
        const double rel = rel_err(closed, quad);
        worst = std::max(worst, rel);
        if (rel > 1e-7 && std::abs(closed - quad) > 1e-12) {
          fail(outcome, "mu=" + format17(mu) + " sigma=" + format17(sigma) +
                            " y*=" + format17(ystar) + " rel=" +
                            format17(rel));
        }
      }
    }
  }
  const long long elapsed = ms_since(t0);
  if (elapsed >= 5000) {
    fail(outcome, "grid took " + std::to_string(elapsed) + " ms (budget 5s)");
  }
  if (outcome.pass) {
    outcome.detail = "max rel " + format17(worst) + ", " +
                     std::to_string(elapsed) + " ms";
  }
  return outcome;
}

// 3. Completing-the-square: integral of exp(sigma u) phi(u) over u <= z
//    equals exp(sigma^2/2) Phi(z - sigma).
Outcome completing_the_square() {
  Outcome outcome;
  const QuadratureConfig cfg;
  double worst = 0.0;
  for (const double sigma : {0.25, 1.0, 2.0, 4.0}) {
    for (const double z : {-5.0, -1.0, 0.0, 1.0, 5.0}) {
      const double integral = exp_weighted_tail_integral(sigma, z, cfg);
      const double closed =
          std::exp(0.5 * sigma * sigma) * normal_cdf(z - sigma);
      const double rel = rel_err(integral, closed);
      worst = std::max(worst, rel);
      if (rel > 1e-9) {
        fail(outcome, "sigma=" + format17(sigma) + " z=" + format17(z) +
                          " rel=" + format17(rel));
      }
    }
  }
  if (outcome.pass) outcome.detail = "max rel " + format17(worst);
  return outcome;
}

// 4. The cancellation identity y* phi(z) = exp(mu + sigma^2/2) phi(z - sigma)
//    (z = (log y* - mu)/sigma) holds in double precision over random draws.
Outcome cancellation_identity() {
  Outcome outcome;
  SeededRng rng(424242);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double mu = rng.uniform_in(-5.0, 5.0);
    const double sigma = 5.0 * (1.0 - rng.uniform());   // (0, 5]
    const double ystar = 20.0 * (1.0 - rng.uniform());  // (0, 20]
    const double z = (std::log(ystar) - mu) / sigma;
    const double lhs = ystar * normal_pdf(z);
    const double rhs =
        std::exp(mu + 0.5 * sigma * sigma) * normal_pdf(z - sigma);
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (scale >= 1e-280) {
      const double rel = std::abs(lhs - rhs) / scale;
      worst = std::max(worst, rel);
      if (rel > 1e-12) {
        fail(outcome, "draw " + std::to_string(i) + ": mu=" + format17(mu) +
                          " sigma=" + format17(sigma) + " y*=" +
                          format17(ystar) + " rel=" + format17(rel));
      }
    } else if (std::abs(lhs - rhs) > 1e-290) {
      // Both sides at the very bottom of the double range: the identity
      // still has to hold absolutely.
      fail(outcome,
           "underflow-zone draw " + std::to_string(i) + ": |lhs-rhs|=" +
               format17(std::abs(lhs - rhs)));
    }
  }
  if (outcome.pass) outcome.detail = "max rel " + format17(worst);
  return outcome;
}

// 5. Monotonicity: both closed forms strictly decrease in mu; EI never
//    decreases in sigma.
Outcome monotonicity() {
  Outcome outcome;
  const int n = 100;
  std::vector<double> ei_values, logei_values;
  for (int i = 0; i < n; ++i) {
    const double mu = -5.0 + 10.0 * i / (n - 1);
    ei_values.push_back(ei_closed({mu, 1.0}, {0.0}).value);
    logei_values.push_back(log_transformed_ei_closed({mu, 1.0}, {1.0}).value);
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (!(ei_values[i + 1] < ei_values[i])) {
      fail(outcome, "ei not strictly decreasing in mu at grid index " +
                        std::to_string(i));
    }
    if (!(logei_values[i + 1] < logei_values[i])) {
      fail(outcome, "logei not strictly decreasing in mu at grid index " +
                        std::to_string(i));
    }
  }
  for (const double ystar : {-1.0, 1.0}) {
    double prev = ei_closed({0.0, 0.0}, {ystar}).value;
    for (int i = 1; i < n; ++i) {
      const double sigma = 5.0 * i / (n - 1);
      const double value = ei_closed({0.0, sigma}, {ystar}).value;
      if (value < prev) {
        fail(outcome, "ei decreased in sigma at sigma=" + format17(sigma) +
                          " y*=" + format17(ystar));
      }
      prev = value;
    }
  }
  return outcome;
}

// 6. The stable log-of-EI exponentiates back to EI wherever EI is
//    representable, and stays finite and accurate deep in the tail.
Outcome log_of_ei_consistency() {
  Outcome outcome;
  double worst = 0.0;
  for (const double sigma : {0.1, 1.0, 3.0}) {
    for (const double z : {-25.0, -20.0, -10.0, -5.0, -2.0, 0.0, 2.0, 5.0}) {
      const double mu = -z * sigma;  // places the incumbent 0 at score z
      const double ei = ei_closed({mu, sigma}, {0.0}).value;
      if (ei < 1e-280) continue;
      const double logged = log_of_ei_stable({mu, sigma}, {0.0}).value;
      const double rel = rel_err(std::exp(logged), ei);
      worst = std::max(worst, rel);
      if (rel > 1e-10) {
        fail(outcome, "sigma=" + format17(sigma) + " z=" + format17(z) +
                          " rel=" + format17(rel));
      }
    }
  }
  const AcquisitionValue deep = log_of_ei_stable({40.0, 1.0}, {0.0});
  if (!std::isfinite(deep.value) ||
      rel_err(deep.value, ref::kLogH_neg40) > 1e-12) {
    fail(outcome, "deep-tail value at z=-40 is " + format17(deep.value) +
                      ", want " + format17(ref::kLogH_neg40));
  }
  if (!deep.underflowed) {
    fail(outcome, "deep-tail value at z=-40 not flagged as underflowed");
  }
  if (outcome.pass) outcome.detail = "max rel " + format17(worst);
  return outcome;
}

double smooth_2d(const Eigen::VectorXd& x) {
  return std::sin(3.0 * x(0)) + 0.5 * std::cos(2.0 * x(1)) +
         0.1 * x(0) * x(1);
}

// 7. GP regression: noiseless interpolation, marginal likelihood against a
//    dense recomputation, and the log-target shortcut.
Outcome gp_regression() {
  Outcome outcome;

  SeededRng rng(7);
  Dataset data(2);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(2);
    x << rng.uniform(), rng.uniform();
    data.add(x, smooth_2d(x));
  }
  const GPModel interp =
      fit(data, GPHyperparams::isotropic(2, 0.4, 1.0, 0.0), false);
  double worst_abs = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    worst_abs = std::max(
        worst_abs, std::abs(interp.predict(data.input(i)).mu - data.target(i)));
  }
  if (worst_abs > 1e-6) {
    fail(outcome, "interpolation error " + format17(worst_abs));
  }

  Dataset small(2);
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd x(2);
    x << rng.uniform(), rng.uniform();
    small.add(x, smooth_2d(x));
  }
  const GPHyperparams hp = GPHyperparams::isotropic(2, 0.4, 1.3, 1e-3);
  const double lml = log_marginal_likelihood(small, hp, false);
  const GPModel model = fit(small, hp, false);
  const int n = small.size();
  Eigen::VectorXd t = small.targets();
  const double shift = t.mean();
  const double scale = std::sqrt((t.array() - shift).square().sum() / n);
  const Eigen::VectorXd t_std = (t.array() - shift) / scale;
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      gram(i, j) = kernel_matern52(small.input(i), small.input(j), hp);
    }
  }
  gram.diagonal().array() += hp.noise_variance + model.jitter();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  const double direct = -0.5 * t_std.dot(lu.solve(t_std)) -
                        0.5 * std::log(lu.determinant()) -
                        0.5 * n * std::log(2.0 * 3.14159265358979323846);
  if (std::abs(lml - direct) > 1e-8) {
    fail(outcome, "marginal likelihood " + format17(lml) +
                      " vs dense recomputation " + format17(direct));
  }

  Dataset raw(2);
  Dataset logged(2);
  for (int i = 0; i < 9; ++i) {
    Eigen::VectorXd x(2);
    x << rng.uniform(), rng.uniform();
    const double y = std::exp(smooth_2d(x));
    raw.add(x, y);
    logged.add(x, std::log(y));
  }
  const GPHyperparams hp2 = GPHyperparams::isotropic(2, 0.5, 1.0, 1e-8);
  const GPModel a = fit(raw, hp2, true);
  const GPModel b = fit(logged, hp2, false);
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd q(2);
    q << rng.uniform(), rng.uniform();
    const PosteriorGaussian pa = a.predict(q);
    const PosteriorGaussian pb = b.predict(q);
    if (std::abs(pa.mu - pb.mu) > 1e-12 ||
        std::abs(pa.sigma - pb.sigma) > 1e-12) {
      fail(outcome, "log-target equivalence broke at query " +
                        std::to_string(i));
    }
  }
  return outcome;
}

// 8. Seeded Monte Carlo estimates of the defining integrals sit within four
//    standard errors of the quadrature values.
Outcome mc_brackets_quadrature() {
  Outcome outcome;
  struct Point {
    double mu, sigma, ystar;
  };
  const std::vector<Point> ei_points = {
      {0, 1, 0},    {0, 1, 1},  {0, 1, -1}, {1, 0.5, 0},     {-1, 0.5, 0},
      {0, 2, 2},    {0, 2, -2}, {2, 1, 1},  {-2, 1, -1},     {0.5, 1.5, -0.7}};
  const std::vector<Point> logei_points = {
      {0, 1, 1},    {0, 1, 2},    {0, 1, 0.5}, {1, 0.5, 2}, {-1, 0.5, 0.5},
      {0, 2, 5},    {1, 1, 1},    {-1, 1, 1},  {0.5, 1.5, 3}, {2, 0.5, 10}};

  double worst_pull = 0.0;
  int index = 0;
  const auto check = [&](const Point& p, AcquisitionVariant variant) {
    QuadratureConfig cfg;
    cfg.mc_samples = 1000000;
    cfg.mc_seed = mix_seed(12345, static_cast<std::uint64_t>(index));
    ++index;
    const PosteriorGaussian post{p.mu, p.sigma};
    const Incumbent inc{p.ystar};
    const double quad = variant == AcquisitionVariant::LogTransformedEi
                            ? log_ei_integral_quadrature(post, inc, cfg)
                            : ei_integral_quadrature(post, inc, cfg);
    const McEstimate mc = ei_integral_mc(post, inc, cfg, variant);
    const double pull = mc.std_error > 0.0
                            ? std::abs(quad - mc.estimate) / mc.std_error
                            : (quad == mc.estimate ? 0.0
                                                   : std::numeric_limits<
                                                         double>::infinity());
    worst_pull = std::max(worst_pull, pull);
    if (std::abs(quad - mc.estimate) > 4.0 * mc.std_error) {
      fail(outcome, std::string(to_string(variant)) + " mu=" +
                        format17(p.mu) + " sigma=" + format17(p.sigma) +
                        " y*=" + format17(p.ystar) + " pull=" +
                        format17(pull));
    }
  };
  for (const Point& p : ei_points) check(p, AcquisitionVariant::Ei);
  for (const Point& p : logei_points) {
    check(p, AcquisitionVariant::LogTransformedEi);
  }
  if (outcome.pass) {
    outcome.detail = "max pull " + format17(worst_pull) + " (limit 4)";
  }
  return outcome;
}

// 9. Under default settings the loop solves quad1d from 20 different seeds
//    for both the plain and log-transformed variants.
Outcome bo_loop_recovers_optimum() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome outcome;
  const Problem& problem = problem_by_name("quad1d");
  for (const AcquisitionVariant variant :
       {AcquisitionVariant::Ei, AcquisitionVariant::LogTransformedEi}) {
    int hits = 0;
    double worst_gap = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      BOConfig config;
      config.acquisition = variant;
      config.seed = seed;
      const std::vector<TrialRecord> records =
          run(problem.objective, problem.space, config);
      const double best = records.back().incumbent_so_far;
      const double gap = std::abs(best - 1.0);
      worst_gap = std::max(worst_gap, gap);
      if (gap <= 1e-2) ++hits;
    }
    if (hits < 18) {
      fail(outcome, std::string(to_string(variant)) + ": only " +
                        std::to_string(hits) + "/20 seeds within 1e-2" +
                        " (worst gap " + format17(worst_gap) + ")");
    }
  }
  const long long elapsed = ms_since(t0);
  if (elapsed >= 60000) {
    fail(outcome,
         "loops took " + std::to_string(elapsed) + " ms (budget 60s)");
  }
  if (outcome.pass) {
    outcome.detail = std::to_string(elapsed) + " ms for 40 runs";
  }
  return outcome;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// 10. The CLI reproduces a run byte for byte when re-invoked with the same
//     seed.
Outcome byte_identical_reruns() {
  Outcome outcome;
  char tmpl[] = "/tmp/logei_acceptance_XXXXXX";
  const char* dir = mkdtemp(tmpl);
  if (dir == nullptr) {
    fail(outcome, "could not create a scratch directory");
    return outcome;
  }
  const std::string base(dir);
  for (const char* sub : {"a", "b"}) {
    const std::string command =
        std::string("env -u LOGEI_BO_SEED \"") + LOGEI_CLI_PATH +
        "\" --output " + base + "/" + sub +
        " --seed 11 --quiet optimize quad1d";
    const int status = std::system(command.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      fail(outcome, std::string("optimize into ") + sub + " exited with " +
                        std::to_string(WIFEXITED(status)
                                           ? WEXITSTATUS(status)
                                           : -1));
      return outcome;
    }
  }
  const std::string first = slurp(base + "/a/trials.jsonl");
  const std::string second = slurp(base + "/b/trials.jsonl");
  if (first.empty()) {
    fail(outcome, "trials.jsonl is empty");
  } else if (first != second) {
    fail(outcome, "trials.jsonl differs between identical runs");
  }
  if (slurp(base + "/a/summary.csv") != slurp(base + "/b/summary.csv")) {
    fail(outcome, "summary.csv differs between identical runs");
  }
  return outcome;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*fn)();
  };
  const std::vector<Entry> criteria = {
      {"closed-form EI matches the quadrature oracle on the reference grid",
       ei_grid_vs_quadrature},
      {"closed-form log-transformed EI matches the quadrature oracle",
       logei_grid_vs_quadrature},
      {"completing-the-square identity holds against direct integration",
       completing_the_square},
      {"log-domain cancellation identity holds over 10000 random draws",
       cancellation_identity},
      {"acquisition values are monotone in mu and sigma", monotonicity},
      {"log-of-EI matches EI and stays finite in the deep tail",
       log_of_ei_consistency},
      {"GP interpolation, marginal likelihood, and log-target equivalence",
       gp_regression},
      {"Monte Carlo estimates bracket the quadrature values within 4 sigma",
       mc_brackets_quadrature},
      {"BO loop recovers the quad1d optimum from 20 seeds per variant",
       bo_loop_recovers_optimum},
      {"repeated optimize runs are byte-identical", byte_identical_reruns},
  };

  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].fn();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("threw: ") + e.what();
    }
    std::string line = outcome.pass ? "PASS" : "FAIL";
    line += " - " + std::to_string(i + 1) + ". " + criteria[i].name;
    if (!outcome.detail.empty()) {
      line += outcome.pass ? " (" + outcome.detail + ")"
                           : ": " + outcome.detail;
    }
    std::printf("%s\n", line.c_str());
    if (!outcome.pass) all_pass = false;
  }
  return all_pass ? 0 : 1;
}
