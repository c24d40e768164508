#include "logei/gp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "logei/errors.hpp"

namespace logei {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964091737;
constexpr double kLog2Pi = 1.8378770664093454835606594;

void require_finite_row(const Eigen::VectorXd& x, const char* what) {
  for (int d = 0; d < x.size(); ++d) {
    if (!std::isfinite(x(d))) {
      throw DomainError(std::string(what) + " has a non-finite entry");
    }
  }
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_cell(std::string_view raw, int line_no, int col) {
  const std::string_view tok = trim(raw);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw DomainError("csv line " + std::to_string(line_no) + ", column " +
                      std::to_string(col) + ": cannot parse '" +
                      std::string(raw) + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw DomainError("csv line " + std::to_string(line_no) + ", column " +
                      std::to_string(col) + ": non-finite value");
  }
  return value;
}

}  // namespace

Dataset::Dataset(int dim) {
  if (dim < 1) {
    throw DomainError("dataset dimension must be >= 1, got " +
                      std::to_string(dim));
  }
  inputs_.resize(0, dim);
  targets_.resize(0);
}

Dataset::Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd targets)
    : inputs_(std::move(inputs)), targets_(std::move(targets)) {
  if (inputs_.rows() != targets_.size()) {
    throw ShapeError("dataset: " + std::to_string(inputs_.rows()) +
                     " input rows vs " + std::to_string(targets_.size()) +
                     " targets");
  }
  if (inputs_.cols() < 1) {
    throw DomainError("dataset dimension must be >= 1");
  }
  if (inputs_.rows() < 1) {
    throw DomainError("dataset must hold at least one observation");
  }
  for (int n = 0; n < inputs_.rows(); ++n) {
    require_finite_row(inputs_.row(n).transpose(),
                       ("observation " + std::to_string(n + 1)).c_str());
    if (!std::isfinite(targets_(n))) {
      throw DomainError("observation " + std::to_string(n + 1) +
                        " has a non-finite target");
    }
  }
}

void Dataset::add(const Eigen::VectorXd& x, double y) {
  if (x.size() != dim()) {
    throw ShapeError("dataset add: point of dimension " +
                     std::to_string(x.size()) + " into a dataset of dimension " +
                     std::to_string(dim()));
  }
  require_finite_row(x, "observation");
  if (!std::isfinite(y)) {
    throw DomainError("observation has a non-finite target");
  }
  inputs_.conservativeResize(inputs_.rows() + 1, Eigen::NoChange);
  inputs_.row(inputs_.rows() - 1) = x.transpose();
  targets_.conservativeResize(targets_.size() + 1);
  targets_(targets_.size() - 1) = y;
}

Dataset Dataset::sorted() const {
  std::vector<int> order(static_cast<std::size_t>(size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [this](int a, int b) {
    for (int d = 0; d < dim(); ++d) {
      if (inputs_(a, d) != inputs_(b, d)) return inputs_(a, d) < inputs_(b, d);
    }
    return targets_(a) < targets_(b);
  });
  Dataset out(dim());
  out.inputs_.resize(size(), dim());
  out.targets_.resize(size());
  for (int n = 0; n < size(); ++n) {
    out.inputs_.row(n) = inputs_.row(order[static_cast<std::size_t>(n)]);
    out.targets_(n) = targets_(order[static_cast<std::size_t>(n)]);
  }
  return out;
}

Dataset load_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DomainError("csv: empty input (missing header)");
  }
  const auto header = split_fields(line);
  const int dim = static_cast<int>(header.size()) - 1;
  if (dim < 1) {
    throw DomainError("csv line 1: expected a header of at least two columns "
                      "(x1,...,y)");
  }

  std::vector<double> xs;
  std::vector<double> ys;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != dim + 1) {
      throw DomainError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim + 1) + " fields, got " +
                        std::to_string(fields.size()));
    }
    for (int c = 0; c < dim; ++c) {
      xs.push_back(parse_cell(fields[static_cast<std::size_t>(c)], line_no,
                              c + 1));
    }
    ys.push_back(parse_cell(fields.back(), line_no, dim + 1));
  }
  if (in.bad()) {
    throw IoError("csv: read failure at line " + std::to_string(line_no));
  }
  const int n = static_cast<int>(ys.size());
  if (n == 0) {
    throw DomainError("csv: no observations after the header");
  }
  Eigen::MatrixXd inputs(n, dim);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < dim; ++c) {
      inputs(r, c) = xs[static_cast<std::size_t>(r * dim + c)];
    }
  }
  return Dataset(std::move(inputs),
                 Eigen::Map<Eigen::VectorXd>(ys.data(), n));
}

Dataset load_dataset_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  return load_dataset_csv(in);
}

void GPHyperparams::validate(int dim) const {
  if (length_scales.size() != dim) {
    throw ShapeError("hyperparams: " + std::to_string(length_scales.size()) +
                     " length scales for dimension " + std::to_string(dim));
  }
  for (int d = 0; d < dim; ++d) {
    if (!(length_scales(d) > 0.0) || !std::isfinite(length_scales(d))) {
      throw DomainError("hyperparams: length scale " + std::to_string(d + 1) +
                        " must be positive and finite");
    }
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw DomainError("hyperparams: signal variance must be positive");
  }
  if (noise_variance < 0.0 || !std::isfinite(noise_variance)) {
    throw DomainError("hyperparams: noise variance must be >= 0");
  }
}

GPHyperparams GPHyperparams::isotropic(int dim, double length_scale,
                                       double signal_variance,
                                       double noise_variance) {
  GPHyperparams hp;
  hp.length_scales = Eigen::VectorXd::Constant(dim, length_scale);
  hp.signal_variance = signal_variance;
  hp.noise_variance = noise_variance;
  hp.validate(dim);
  return hp;
}

double kernel_matern52(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const GPHyperparams& hp) {
  if (a.size() != b.size() || a.size() != hp.length_scales.size()) {
    throw ShapeError("kernel: dimension mismatch (" + std::to_string(a.size()) +
                     ", " + std::to_string(b.size()) + ", " +
                     std::to_string(hp.length_scales.size()) + ")");
  }
  double r2 = 0.0;
  for (int d = 0; d < a.size(); ++d) {
    const double t = (a(d) - b(d)) / hp.length_scales(d);
    r2 += t * t;
  }
  const double s = kSqrt5 * std::sqrt(r2);
  return hp.signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

GPModel fit(const Dataset& data, const GPHyperparams& hp, bool log_targets) {
  if (data.size() < 1) {
    throw DomainError("fit: dataset must hold at least one observation");
  }
  hp.validate(data.dim());

  const int n = data.size();
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) {
    const double y = data.target(i);
    if (log_targets && y <= 0.0) {
      throw DomainError("fit: log transform requires positive targets; "
                        "observation " + std::to_string(i + 1) + " has y = " +
                        std::to_string(y));
    }
    t(i) = log_targets ? std::log(y) : y;
  }

  // A singular kernel matrix from repeated rows is a data problem, not a
  // conditioning problem; refuse it rather than paper over it with jitter.
  if (hp.noise_variance == 0.0) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if ((data.inputs().row(i).array() == data.inputs().row(j).array())
                .all()) {
          throw DomainError("fit: observations " + std::to_string(i + 1) +
                            " and " + std::to_string(j + 1) +
                            " share an input but noise variance is 0");
        }
      }
    }
  }

  GPModel model;
  model.hp_ = hp;
  model.train_x_ = data.inputs();
  model.log_targets_ = log_targets;

  if (n == 1) {
    model.shift_ = 0.0;
    model.scale_ = 1.0;
  } else {
    model.shift_ = t.mean();
    const double var = (t.array() - model.shift_).square().sum() / n;
    const double sd = std::sqrt(var);
    model.scale_ = sd > 0.0 ? sd : 1.0;
  }
  model.targets_std_ = (t.array() - model.shift_) / model.scale_;

  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = hp.signal_variance + hp.noise_variance;
    for (int j = i + 1; j < n; ++j) {
      const double v = kernel_matern52(data.input(i), data.input(j), hp);
      k(i, j) = v;
      k(j, i) = v;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  while (true) {
    llt.compute(k + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) break;
    const double next =
        jitter == 0.0 ? 1e-10 * hp.signal_variance : jitter * 10.0;
    if (next > 1e-4 * hp.signal_variance) {
      std::ostringstream msg;
      msg << "fit: Cholesky factorization failed after escalating jitter to "
          << jitter << " (1e-4 * signal_variance cap)";
      throw NumericError(msg.str());
    }
    jitter = next;
  }
  model.jitter_ = jitter;
  model.chol_ = llt.matrixL();
  model.weights_ = llt.solve(model.targets_std_);
  return model;
}

PosteriorGaussian GPModel::predict(const Eigen::VectorXd& x) const {
  if (x.size() != train_x_.cols()) {
    throw ShapeError("predict: query of dimension " + std::to_string(x.size()) +
                     " against a model of dimension " +
                     std::to_string(train_x_.cols()));
  }
  require_finite_row(x, "query");
  const int n = static_cast<int>(train_x_.rows());
  Eigen::VectorXd ks(n);
  for (int i = 0; i < n; ++i) {
    ks(i) = kernel_matern52(x, train_x_.row(i).transpose(), hp_);
  }
  const double mu_std = ks.dot(weights_);
  const Eigen::VectorXd v =
      chol_.triangularView<Eigen::Lower>().solve(ks);
  double var_std = hp_.signal_variance - v.squaredNorm();
  // Round-off tolerance scales with the prior variance that the subtraction
  // cancels against.
  const double clamp = 1e-10 * std::max(1.0, hp_.signal_variance);
  if (var_std < 0.0) {
    if (var_std < -clamp) {
      std::ostringstream msg;
      msg << "predict: posterior variance " << var_std
          << " below the round-off clamp " << -clamp;
      throw NumericError(msg.str());
    }
    var_std = 0.0;
  }
  return {shift_ + scale_ * mu_std, scale_ * std::sqrt(var_std)};
}

double log_marginal_likelihood(const Dataset& data, const GPHyperparams& hp,
                               bool log_targets) {
  const GPModel model = fit(data, hp, log_targets);
  const int n = data.size();
  const double quad = model.internal_targets().dot(model.weights());
  const double log_det =
      2.0 * model.chol_factor().diagonal().array().log().sum();
  return -0.5 * quad - 0.5 * log_det - 0.5 * n * kLog2Pi;
}

GPHyperparams default_hyperparams(const Dataset& data) {
  const int d = data.dim();
  Eigen::VectorXd ls(d);
  for (int i = 0; i < d; ++i) {
    const double span =
        data.inputs().col(i).maxCoeff() - data.inputs().col(i).minCoeff();
    ls(i) = span > 0.0 ? 0.5 * span : 1.0;
  }
  GPHyperparams hp;
  hp.length_scales = ls;
  hp.signal_variance = 1.0;
  hp.noise_variance = 1e-6;
  return hp;
}

namespace {

struct TuneBounds {
  double lo;
  double hi;
};

// Coordinates are log parameters: [log ls_1 .. log ls_D, log sv, log nv].
std::vector<TuneBounds> tune_bounds(int dim) {
  std::vector<TuneBounds> b(static_cast<std::size_t>(dim) + 2);
  for (int d = 0; d < dim; ++d) {
    b[static_cast<std::size_t>(d)] = {std::log(1e-8), std::log(1e8)};
  }
  b[static_cast<std::size_t>(dim)] = {std::log(1e-12), std::log(1e8)};
  b[static_cast<std::size_t>(dim) + 1] = {std::log(1e-12), std::log(1e4)};
  return b;
}

GPHyperparams params_from_log(const Eigen::VectorXd& theta, int dim) {
  GPHyperparams hp;
  hp.length_scales = theta.head(dim).array().exp();
  hp.signal_variance = std::exp(theta(dim));
  hp.noise_variance = std::exp(theta(dim + 1));
  return hp;
}

}  // namespace

GPHyperparams tune_hyperparams(const Dataset& data, bool log_targets,
                               int budget) {
  if (budget < 1) {
    throw DomainError("tune_hyperparams: budget must be >= 1, got " +
                      std::to_string(budget));
  }
  const int dim = data.dim();
  const int n_par = dim + 2;
  const auto bounds = tune_bounds(dim);

  const GPHyperparams base = default_hyperparams(data);
  Eigen::VectorXd theta0(n_par);
  theta0.head(dim) = base.length_scales.array().log();
  theta0(dim) = std::log(base.signal_variance);
  theta0(dim + 1) = std::log(base.noise_variance);

  const auto objective = [&](const Eigen::VectorXd& theta) -> double {
    try {
      return log_marginal_likelihood(data, params_from_log(theta, dim),
                                     log_targets);
    } catch (const NumericError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const auto clamp_coord = [&](double v, int c) {
    return std::min(std::max(v, bounds[static_cast<std::size_t>(c)].lo),
                    bounds[static_cast<std::size_t>(c)].hi);
  };

  constexpr int kStarts = 8;
  std::mt19937_64 rng(0x5eedba5eu);
  std::uniform_real_distribution<double> jiggle(-2.0, 2.0);

  double best_value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta;
  for (int s = 0; s < kStarts; ++s) {
    Eigen::VectorXd theta = theta0;
    if (s > 0) {
      for (int c = 0; c < n_par; ++c) {
        theta(c) = clamp_coord(theta(c) + jiggle(rng), c);
      }
    }
    double value = objective(theta);
    for (int sweep = 0; sweep < budget; ++sweep) {
      const double step = std::ldexp(1.0, -sweep);  // 1, 0.5, 0.25, ...
      for (int c = 0; c < n_par; ++c) {
        for (const double dir : {+1.0, -1.0}) {
          // March along the coordinate while the likelihood keeps improving.
          while (true) {
            Eigen::VectorXd probe = theta;
            probe(c) = clamp_coord(probe(c) + dir * step, c);
            if (probe(c) == theta(c)) break;
            const double pv = objective(probe);
            if (pv > value) {
              theta = probe;
              value = pv;
            } else {
              break;
            }
          }
        }
      }
    }
    if (value > best_value) {
      best_value = value;
      best_theta = theta;
    }
  }
  if (!std::isfinite(best_value)) {
    throw NumericError("tune_hyperparams: every start failed to factorize");
  }
  return params_from_log(best_theta, dim);
}

}  // namespace logei
