#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "logei/acquisition.hpp"

namespace logei {

// One (x, y) pair of the observation set.
struct Observation {
  Eigen::VectorXd x;
  double y = 0.0;
};

// The observation set D; the single source of training data.
class Dataset {
 public:
  // An empty dataset of the given dimension. Observations are appended with
  // add(); size() >= 1 is required by fit and incumbent_from, not here.
  explicit Dataset(int dim);

  // Validates dimensions and finiteness of every entry.
  Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd targets);

  void add(const Eigen::VectorXd& x, double y);

  int dim() const { return static_cast<int>(inputs_.cols()); }
  int size() const { return static_cast<int>(inputs_.rows()); }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  Eigen::VectorXd input(int n) const { return inputs_.row(n).transpose(); }
  double target(int n) const { return targets_(n); }

  // A copy with rows ordered lexicographically by (x, y); makes downstream
  // computations independent of observation order.
  Dataset sorted() const;

 private:
  Eigen::MatrixXd inputs_;   // N x D
  Eigen::VectorXd targets_;  // N
};

// Reads `x1,...,xD,y` CSV. Header is line 1; parse failures carry the line
// number. Throws IoError when the stream/file cannot be read, DomainError on
// malformed content.
Dataset load_dataset_csv(std::istream& in);
Dataset load_dataset_csv_file(const std::string& path);

struct GPHyperparams {
  Eigen::VectorXd length_scales;  // per dimension, > 0
  double signal_variance = 1.0;   // > 0
  double noise_variance = 1e-8;   // >= 0

  void validate(int dim) const;

  // Isotropic convenience constructor.
  static GPHyperparams isotropic(int dim, double length_scale,
                                 double signal_variance,
                                 double noise_variance);
};

// Matern-5/2 covariance with anisotropic length scales:
//   k(a, b) = sv * (1 + sqrt(5) r + 5 r^2 / 3) exp(-sqrt(5) r),
// r the per-dimension scaled Euclidean distance. Throws ShapeError on
// dimension mismatch.
double kernel_matern52(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const GPHyperparams& hp);

struct PosteriorGaussian;

// Exact GP regression model: cached Cholesky factorization of
// K + noise_variance * I over standardized (optionally log-transformed)
// targets. Immutable after fit; concurrent predict calls are safe.
class GPModel {
 public:
  // Prediction in the trained target's space (log space when the model was
  // fit with log_targets). Throws ShapeError on dimension mismatch,
  // NumericError if the computed variance is below the round-off clamp.
  PosteriorGaussian predict(const Eigen::VectorXd& x) const;

  const GPHyperparams& hyperparams() const { return hp_; }
  const Eigen::MatrixXd& training_inputs() const { return train_x_; }
  const Eigen::MatrixXd& chol_factor() const { return chol_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& internal_targets() const { return targets_std_; }
  double target_shift() const { return shift_; }
  double target_scale() const { return scale_; }
  double jitter() const { return jitter_; }
  bool log_targets() const { return log_targets_; }

 private:
  friend GPModel fit(const Dataset&, const GPHyperparams&, bool);

  GPHyperparams hp_;
  Eigen::MatrixXd train_x_;
  Eigen::MatrixXd chol_;        // lower-triangular L, L L^T = K + (nv + jitter) I
  Eigen::VectorXd weights_;     // (K + (nv + jitter) I)^{-1} t_std
  Eigen::VectorXd targets_std_;
  double shift_ = 0.0;
  double scale_ = 1.0;
  double jitter_ = 0.0;
  bool log_targets_ = false;
};

// Fits the exact GP. With log_targets the model is trained on log y_n and
// predictions come back in log space; every y_n must then be positive
// (DomainError naming the offending observation otherwise). Targets are
// standardized to zero mean and unit variance before fitting (skipped for
// N = 1 and inverted transparently on prediction). Cholesky failures
// escalate diagonal jitter from 1e-10 * sv by factors of 10 up to
// 1e-4 * sv, then raise NumericError.
GPModel fit(const Dataset& data, const GPHyperparams& hp, bool log_targets);

// log p(t | X, hp) on the standardized targets:
//   -1/2 t^T (K + nv I)^{-1} t - 1/2 log det(K + nv I) - N/2 log(2 pi).
double log_marginal_likelihood(const Dataset& data, const GPHyperparams& hp,
                               bool log_targets);

// Best hyperparameters found by 8-start coordinate-wise log-space descent
// over the marginal likelihood; `budget` is the number of refinement sweeps
// per start. Deterministic: the start perturbations come from a fixed
// internal seed. Throws NumericError if every start fails.
GPHyperparams tune_hyperparams(const Dataset& data, bool log_targets,
                               int budget);

// Default starting hyperparameters used by tune_hyperparams: length scales
// at half the per-dimension data span, unit signal variance, small noise.
GPHyperparams default_hyperparams(const Dataset& data);

}  // namespace logei
