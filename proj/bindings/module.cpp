#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "logei/acquisition.hpp"
#include "logei/bo_loop.hpp"
#include "logei/errors.hpp"
#include "logei/gp.hpp"
#include "logei/oracle.hpp"
#include "logei/problems.hpp"
#include "logei/version.hpp"

namespace py = pybind11;
using namespace logei;

namespace {

AcquisitionVariant variant_arg(const std::string& name) {
  return acquisition_variant_from_string(name);
}

py::dict record_to_dict(const TrialRecord& rec) {
  py::dict d;
  d["iter"] = rec.iteration;
  d["x"] = rec.x;
  d["y"] = rec.y;
  d["incumbent"] = rec.incumbent_so_far;
  d["acq"] = rec.acquisition_value_at_x;
  d["wall_ms"] = rec.wall_ms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Expected-improvement Bayesian optimization core";
  m.attr("__version__") = kVersion;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError",
                                       PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def(
      "normal_pdf", [](double z) { return normal_pdf(z); }, py::arg("z"));
  m.def(
      "normal_cdf", [](double z) { return normal_cdf(z); }, py::arg("z"));
  m.def(
      "log_normal_cdf", [](double z) { return log_normal_cdf(z); },
      py::arg("z"));

  m.def(
      "ei",
      [](double mu, double sigma, double y_star) {
        const AcquisitionValue v = ei_closed({mu, sigma}, {y_star});
        return py::make_tuple(v.value, v.underflowed);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("y_star"),
      "Closed-form EI; returns (value, underflowed)");
  m.def(
      "logei",
      [](double mu, double sigma, double y_star) {
        const AcquisitionValue v =
            log_transformed_ei_closed({mu, sigma}, {y_star});
        return py::make_tuple(v.value, v.underflowed);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("y_star"),
      "Closed-form EI for a GP over log y; returns (value, underflowed)");
  m.def(
      "log_of_ei",
      [](double mu, double sigma, double y_star) {
        const AcquisitionValue v = log_of_ei_stable({mu, sigma}, {y_star});
        return py::make_tuple(v.value, v.underflowed);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("y_star"),
      "log(EI) evaluated without intermediate underflow");

  m.def(
      "ei_integral",
      [](double mu, double sigma, double y_star, int node_count) {
        QuadratureConfig cfg;
        cfg.node_count = node_count;
        return ei_integral_quadrature({mu, sigma}, {y_star}, cfg);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("y_star"),
      py::arg("node_count") = 32, "Quadrature oracle for the EI integral");
  m.def(
      "logei_integral",
      [](double mu, double sigma, double y_star, int node_count) {
        QuadratureConfig cfg;
        cfg.node_count = node_count;
        return log_ei_integral_quadrature({mu, sigma}, {y_star}, cfg);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("y_star"),
      py::arg("node_count") = 32, "Quadrature oracle for the logEI integral");
  m.def(
      "ei_mc",
      [](double mu, double sigma, double y_star, const std::string& variant,
         long long samples, std::uint64_t seed) {
        QuadratureConfig cfg;
        cfg.mc_samples = samples;
        cfg.mc_seed = seed;
        const McEstimate est =
            ei_integral_mc({mu, sigma}, {y_star}, cfg, variant_arg(variant));
        return py::make_tuple(est.estimate, est.std_error);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("y_star"), py::arg("variant"),
      py::arg("samples") = 100000, py::arg("seed") = 0,
      "Monte Carlo oracle; returns (estimate, std_error)");

  py::class_<GPModel>(m, "GPModel")
      .def(
          "predict",
          [](const GPModel& model, const Eigen::VectorXd& x) {
            const PosteriorGaussian post = model.predict(x);
            return py::make_tuple(post.mu, post.sigma);
          },
          py::arg("x"), "Posterior (mu, sigma) at x")
      .def_property_readonly("log_targets", &GPModel::log_targets)
      .def_property_readonly("target_shift", &GPModel::target_shift)
      .def_property_readonly("target_scale", &GPModel::target_scale)
      .def_property_readonly("length_scales",
                             [](const GPModel& model) {
                               return model.hyperparams().length_scales;
                             })
      .def_property_readonly("signal_variance",
                             [](const GPModel& model) {
                               return model.hyperparams().signal_variance;
                             })
      .def_property_readonly("noise_variance", [](const GPModel& model) {
        return model.hyperparams().noise_variance;
      });

  m.def(
      "fit_gp",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
         const Eigen::VectorXd& length_scales, double signal_variance,
         double noise_variance, bool log_targets) {
        GPHyperparams hp;
        hp.length_scales = length_scales;
        hp.signal_variance = signal_variance;
        hp.noise_variance = noise_variance;
        return fit(Dataset(x, y), hp, log_targets);
      },
      py::arg("x"), py::arg("y"), py::arg("length_scales"),
      py::arg("signal_variance") = 1.0, py::arg("noise_variance") = 1e-8,
      py::arg("log_targets") = false);
  m.def(
      "fit_gp_tuned",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool log_targets,
         int budget) {
        const Dataset data(x, y);
        return fit(data, tune_hyperparams(data, log_targets, budget),
                   log_targets);
      },
      py::arg("x"), py::arg("y"), py::arg("log_targets") = false,
      py::arg("budget") = 2);
  m.def(
      "log_marginal_likelihood",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
         const Eigen::VectorXd& length_scales, double signal_variance,
         double noise_variance, bool log_targets) {
        GPHyperparams hp;
        hp.length_scales = length_scales;
        hp.signal_variance = signal_variance;
        hp.noise_variance = noise_variance;
        return log_marginal_likelihood(Dataset(x, y), hp, log_targets);
      },
      py::arg("x"), py::arg("y"), py::arg("length_scales"),
      py::arg("signal_variance") = 1.0, py::arg("noise_variance") = 1e-8,
      py::arg("log_targets") = false);

  m.def(
      "suggest",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
         const std::string& variant, std::uint64_t seed, int max_evaluations,
         int init_design_size) {
        SearchSpace space;
        space.dim = static_cast<int>(lower.size());
        space.lower = lower;
        space.upper = upper;
        BOConfig config;
        config.acquisition = variant_arg(variant);
        config.seed = seed;
        config.max_evaluations = max_evaluations;
        config.init_design_size = init_design_size;
        return suggest(Dataset(x, y), space, config);
      },
      py::arg("x"), py::arg("y"), py::arg("lower"), py::arg("upper"),
      py::arg("variant") = "ei", py::arg("seed") = 0,
      py::arg("max_evaluations") = 30, py::arg("init_design_size") = 6,
      "Next point to evaluate given the observations so far");
  m.def(
      "run_bo",
      [](const std::function<double(const Eigen::VectorXd&)>& objective,
         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
         const std::string& variant, std::uint64_t seed,
         int max_evaluations) {
        SearchSpace space;
        space.dim = static_cast<int>(lower.size());
        space.lower = lower;
        space.upper = upper;
        BOConfig config;
        config.acquisition = variant_arg(variant);
        config.seed = seed;
        config.max_evaluations = max_evaluations;
        const auto records = run(objective, space, config);
        py::list out;
        for (const auto& rec : records) out.append(record_to_dict(rec));
        return out;
      },
      py::arg("objective"), py::arg("lower"), py::arg("upper"),
      py::arg("variant") = "ei", py::arg("seed") = 0,
      py::arg("max_evaluations") = 30,
      "Full BO loop over a python objective; returns trial dicts");
  m.def("problems", [] {
    py::list out;
    for (const auto& p : builtin_problems()) {
      py::dict d;
      d["name"] = p.name;
      d["lower"] = p.space.lower;
      d["upper"] = p.space.upper;
      d["optimum"] = p.optimum;
      out.append(d);
    }
    return out;
  });
  m.def(
      "run_problem",
      [](const std::string& name, const std::string& variant,
         std::uint64_t seed, int max_evaluations) {
        const Problem& p = problem_by_name(name);
        BOConfig config;
        config.acquisition = variant_arg(variant);
        config.seed = seed;
        config.max_evaluations = max_evaluations;
        const auto records = run(p.objective, p.space, config);
        py::list out;
        for (const auto& rec : records) out.append(record_to_dict(rec));
        return out;
      },
      py::arg("name"), py::arg("variant") = "ei", py::arg("seed") = 0,
      py::arg("max_evaluations") = 30);
}
