#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "logei/acquisition.hpp"
#include "logei/bo_loop.hpp"
#include "logei/errors.hpp"
#include "logei/gp.hpp"
#include "logei/manifest.hpp"
#include "logei/oracle.hpp"
#include "logei/problems.hpp"
#include "logei/rng.hpp"
#include "logei/version.hpp"

namespace {

using namespace logei;

// Exit codes: BSD sysexits for usage/data plus the conventional 2 for I/O.
constexpr int kExitOk = 0;
constexpr int kExitToleranceFailure = 1;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNumeric = 70;

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string tok = text.substr(start, comma - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
      throw ConfigError(what + ": cannot parse '" + tok + "' as a number");
    }
    out.push_back(v);
    start = comma + 1;
  }
  if (out.empty()) {
    throw ConfigError(what + ": empty list");
  }
  return out;
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("LOGEI_BO_SEED");
  if (raw == nullptr) return std::nullopt;
  std::uint64_t v = 0;
  const std::string s(raw);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("LOGEI_BO_SEED: cannot parse '" + s +
                      "' as a nonnegative integer");
  }
  return v;
}

// Output sink honoring --output; "-" or empty means stdout.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) {
        throw IoError("cannot open '" + path + "' for writing");
      }
      out_ = &file_;
    } else {
      out_ = &std::cout;
    }
  }
  std::ostream& stream() { return *out_; }
  void finish() {
    out_->flush();
    if (file_.is_open() && !file_) {
      throw IoError("write failure on the output file");
    }
  }

 private:
  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

struct VerifyArgs {
  std::string variant = "both";
  std::string mu, sigma, ystar;
  std::string output;
  std::uint64_t seed = 0;
  bool quiet = false;
};

int cmd_verify(const VerifyArgs& args) {
  const std::vector<double> mu_default = {-3, -2, -1, 0, 1, 2, 3};
  const std::vector<double> sigma_default = {0.1, 0.5, 1, 2, 5};
  const std::vector<double> ystar_ei_default = {-2, -1, 0, 1, 2};
  const std::vector<double> ystar_logei_default = {0.1, 0.5, 1, 2, 10};

  std::vector<AcquisitionVariant> variants;
  if (args.variant == "both") {
    variants = {AcquisitionVariant::Ei, AcquisitionVariant::LogTransformedEi};
  } else {
    const AcquisitionVariant v = acquisition_variant_from_string(args.variant);
    if (v == AcquisitionVariant::LogOfEi) {
      throw ConfigError("verify: the logofei variant has no defining "
                        "integral; verify covers ei and logei");
    }
    variants = {v};
  }

  const std::vector<double> mus =
      args.mu.empty() ? mu_default : parse_double_list(args.mu, "--mu");
  const std::vector<double> sigmas =
      args.sigma.empty() ? sigma_default
                         : parse_double_list(args.sigma, "--sigma");
  for (const double s : sigmas) {
    if (s < 0.0 || !std::isfinite(s)) {
      throw ConfigError("--sigma: values must be finite and >= 0, got " +
                        format17(s));
    }
  }
  std::optional<std::vector<double>> ystar_custom;
  if (!args.ystar.empty()) {
    ystar_custom = parse_double_list(args.ystar, "--ystar");
  }

  OutputTarget target(args.output);
  std::ostream& out = target.stream();
  out << "mu,sigma,y_star,variant,closed_form,quadrature,mc_estimate,"
         "mc_stderr,rel_err\n";

  int rows = 0;
  int checked = 0;
  double max_rel = 0.0;
  bool ok = true;
  for (const AcquisitionVariant variant : variants) {
    const bool log_variant = variant == AcquisitionVariant::LogTransformedEi;
    const std::vector<double>& ystars =
        ystar_custom ? *ystar_custom
                     : (log_variant ? ystar_logei_default : ystar_ei_default);
    if (log_variant) {
      for (const double y : ystars) {
        if (y <= 0.0) {
          throw ConfigError("--ystar: the logei variant requires y* > 0, "
                            "got " + format17(y));
        }
      }
    }
    const double tol = log_variant ? 1e-7 : 1e-8;
    for (const double mu : mus) {
      for (const double sigma : sigmas) {
        for (const double ystar : ystars) {
          const PosteriorGaussian post{mu, sigma};
          const Incumbent inc{ystar};
          const double closed =
              log_variant ? log_transformed_ei_closed(post, inc).value
                          : ei_closed(post, inc).value;
          out << format17(mu) << ',' << format17(sigma) << ','
              << format17(ystar) << ',' << to_string(variant) << ','
              << format17(closed) << ',';
          if (sigma == 0.0) {
            out << "skipped,skipped,skipped,skipped\n";
          } else {
            QuadratureConfig cfg;
            cfg.mc_seed = mix_seed(args.seed, static_cast<std::uint64_t>(rows));
            const double quad =
                log_variant ? log_ei_integral_quadrature(post, inc, cfg)
                            : ei_integral_quadrature(post, inc, cfg);
            const McEstimate mc = ei_integral_mc(post, inc, cfg, variant);
            const double diff = std::abs(closed - quad);
            const double denom = std::max(std::abs(closed), std::abs(quad));
            const double rel = denom > 0.0 ? diff / denom : 0.0;
            out << format17(quad) << ',' << format17(mc.estimate) << ','
                << format17(mc.std_error) << ',' << format17(rel) << '\n';
            max_rel = std::max(max_rel, rel);
            if (rel > tol && diff > 1e-12) ok = false;
            ++checked;
          }
          ++rows;
        }
      }
    }
  }
  target.finish();
  if (!args.quiet) {
    std::cerr << "verify: " << rows << " rows, " << checked
              << " checked against quadrature, max rel err " << max_rel
              << " -> " << (ok ? "PASS" : "FAIL") << "\n";
  }
  return ok ? kExitOk : kExitToleranceFailure;
}

struct OptimizeArgs {
  std::string problem;
  std::string config_path;
  std::string variant;
  std::string output;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool quiet = false;
};

int cmd_optimize(const OptimizeArgs& args) {
  const Problem* problem = nullptr;
  try {
    problem = &problem_by_name(args.problem);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  RunConfig cfg;
  if (const auto env = env_seed()) cfg.bo.seed = *env;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) {
      throw IoError("cannot open '" + args.config_path + "' for reading");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    cfg = parse_run_config(buffer.str(), cfg);
  }
  if (args.seed_given) cfg.bo.seed = args.seed;
  if (!args.variant.empty()) {
    try {
      cfg.bo.acquisition = acquisition_variant_from_string(args.variant);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  cfg.bo.validate();
  cfg.quad.validate();

  namespace fs = std::filesystem;
  const fs::path outdir = args.output.empty() ? fs::path(".")
                                              : fs::path(args.output);
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + outdir.string() +
                  "': " + ec.message());
  }

  std::ofstream trials(outdir / "trials.jsonl");
  if (!trials) {
    throw IoError("cannot open '" + (outdir / "trials.jsonl").string() +
                  "' for writing");
  }

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<TrialRecord> records =
      run(problem->objective, problem->space, cfg.bo,
          [&](const TrialRecord& rec) {
            trials << trial_to_jsonl(rec) << '\n';
          });
  const auto t1 = std::chrono::steady_clock::now();
  trials.flush();
  if (!trials) {
    throw IoError("write failure on trials.jsonl");
  }
  const long long loop_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  // summary.csv aggregates the trial records, so a rerun with the same
  // manifest reproduces it byte for byte; the stderr line reports the
  // observed loop time instead.
  long long total_ms = 0;
  for (const TrialRecord& rec : records) total_ms += rec.wall_ms;

  RunManifest manifest;
  manifest.artifact_version = kVersion;
  manifest.generator = kMcGeneratorName;
  manifest.problem = problem->name;
  manifest.bo = cfg.bo;
  manifest.quad = cfg.quad;
  manifest.created_at = now_utc_iso8601();
  std::ofstream mf(outdir / "manifest.json");
  if (!mf) {
    throw IoError("cannot open manifest.json for writing");
  }
  mf << serialize_manifest(manifest);
  mf.flush();
  if (!mf) {
    throw IoError("write failure on manifest.json");
  }

  const double final_incumbent = records.back().incumbent_so_far;
  std::ofstream summary(outdir / "summary.csv");
  if (!summary) {
    throw IoError("cannot open summary.csv for writing");
  }
  summary << "problem,variant,evaluations,final_incumbent,total_wall_ms\n"
          << problem->name << ',' << to_string(cfg.bo.acquisition) << ','
          << records.size() << ',' << format17(final_incumbent) << ','
          << total_ms << '\n';
  summary.flush();
  if (!summary) {
    throw IoError("write failure on summary.csv");
  }

  if (!args.quiet) {
    std::cerr << "optimize: " << problem->name << " ("
              << to_string(cfg.bo.acquisition) << ", seed " << cfg.bo.seed
              << ") incumbent " << format17(final_incumbent) << " after "
              << records.size() << " evaluations in " << loop_ms << " ms\n";
  }
  return kExitOk;
}

struct EvalArgs {
  double mu = 0.0;
  double sigma = 0.0;
  double ystar = 0.0;
  std::string variant;
  std::string output;
};

int cmd_evaluate_acq(const EvalArgs& args) {
  try {
    const AcquisitionVariant variant =
        acquisition_variant_from_string(args.variant);
    AcquisitionSpec spec{variant, Incumbent{args.ystar}};
    const AcquisitionValue value =
        evaluate_acquisition(spec, PosteriorGaussian{args.mu, args.sigma});
    OutputTarget target(args.output);
    target.stream() << format17(value.value);
    if (variant == AcquisitionVariant::LogOfEi) {
      target.stream() << " underflowed="
                      << (value.underflowed ? "true" : "false");
    }
    target.stream() << '\n';
    target.finish();
    return kExitOk;
  } catch (const DomainError& e) {
    // Precondition violations on direct numeric arguments are usage errors.
    throw ConfigError(e.what());
  }
}

struct FitArgs {
  std::string csv_path;
  bool log_targets = false;
  std::string predict;
  int tune_budget = 2;
  double noise = -1.0;
  bool noise_given = false;
  std::string output;
};

int cmd_fit(const FitArgs& args) {
  const Dataset data = load_dataset_csv_file(args.csv_path);
  GPHyperparams hp =
      tune_hyperparams(data, args.log_targets, args.tune_budget);
  if (args.noise_given) {
    if (!(args.noise >= 0.0) || !std::isfinite(args.noise)) {
      throw ConfigError("--noise: must be finite and >= 0, got " +
                        format17(args.noise));
    }
    hp.noise_variance = args.noise;
  }
  const GPModel model = fit(data, hp, args.log_targets);
  const double lml = log_marginal_likelihood(data, hp, args.log_targets);

  std::ostringstream json;
  json << "{\n  \"length_scales\": [";
  for (int d = 0; d < hp.length_scales.size(); ++d) {
    if (d > 0) json << ", ";
    json << format17(hp.length_scales(d));
  }
  json << "],\n  \"signal_variance\": " << format17(hp.signal_variance)
       << ",\n  \"noise_variance\": " << format17(hp.noise_variance)
       << ",\n  \"log_targets\": " << (args.log_targets ? "true" : "false")
       << ",\n  \"log_marginal_likelihood\": " << format17(lml)
       << ",\n  \"target_shift\": " << format17(model.target_shift())
       << ",\n  \"target_scale\": " << format17(model.target_scale())
       << ",\n  \"jitter\": " << format17(model.jitter())
       << ",\n  \"internal_targets\": [";
  for (int n = 0; n < model.internal_targets().size(); ++n) {
    if (n > 0) json << ", ";
    json << format17(model.internal_targets()(n));
  }
  json << "]";
  if (!args.predict.empty()) {
    const std::vector<double> coords =
        parse_double_list(args.predict, "--predict");
    if (static_cast<int>(coords.size()) != data.dim()) {
      throw ConfigError("--predict: expected " + std::to_string(data.dim()) +
                        " coordinates, got " + std::to_string(coords.size()));
    }
    Eigen::VectorXd x(data.dim());
    for (int d = 0; d < data.dim(); ++d) x(d) = coords[static_cast<std::size_t>(d)];
    const PosteriorGaussian post = model.predict(x);
    json << ",\n  \"prediction\": {\"mu\": " << format17(post.mu)
         << ", \"sigma\": " << format17(post.sigma) << "}";
  }
  json << "\n}\n";

  OutputTarget target(args.output);
  target.stream() << json.str();
  target.finish();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected-improvement Bayesian optimization toolkit"};
  app.require_subcommand(1);
  app.fallthrough(true);

  std::uint64_t seed = 0;
  std::string output;
  bool quiet = false;
  auto* seed_opt =
      app.add_option("--seed", seed,
                     "Run seed (falls back to LOGEI_BO_SEED, then 0)");
  app.add_option("--output", output,
                 "Output file (verify/evaluate-acq/fit) or directory "
                 "(optimize); '-' or unset means stdout");
  app.add_flag("--quiet", quiet, "Suppress the summary line on stderr");

  auto* verify = app.add_subcommand(
      "verify", "Sweep closed forms against the quadrature and MC oracles");
  VerifyArgs vargs;
  verify->add_option("--variant", vargs.variant,
                     "ei, logei, or both (default both)");
  verify->add_option("--mu", vargs.mu, "Comma-separated mu grid");
  verify->add_option("--sigma", vargs.sigma, "Comma-separated sigma grid");
  verify->add_option("--ystar", vargs.ystar, "Comma-separated y* grid");

  auto* optimize = app.add_subcommand(
      "optimize", "Run the BO loop on a built-in problem");
  OptimizeArgs oargs;
  optimize->add_option("problem", oargs.problem, "Built-in problem name")
      ->required();
  optimize->add_option("--config", oargs.config_path, "JSON run config");
  optimize->add_option("--variant", oargs.variant,
                       "Acquisition variant override (ei, logei, logofei)");

  auto* evaluate = app.add_subcommand(
      "evaluate-acq", "Evaluate one acquisition value");
  EvalArgs eargs;
  evaluate->add_option("mu", eargs.mu, "Posterior mean")->required();
  evaluate->add_option("sigma", eargs.sigma, "Posterior std dev")->required();
  evaluate->add_option("y_star", eargs.ystar, "Incumbent")->required();
  evaluate->add_option("variant", eargs.variant, "ei, logei, or logofei")
      ->required();

  auto* fit_cmd = app.add_subcommand(
      "fit", "Tune and fit a GP on a CSV dataset, print it as JSON");
  FitArgs fargs;
  fit_cmd->add_option("csv", fargs.csv_path, "Dataset CSV (x1,...,xD,y)")
      ->required();
  fit_cmd->add_flag("--log-targets", fargs.log_targets,
                    "Model log(y) instead of y");
  fit_cmd->add_option("--predict", fargs.predict,
                      "Comma-separated query point for a posterior printout");
  fit_cmd->add_option("--tune-budget", fargs.tune_budget,
                      "Refinement sweeps per tuning start (default 2)");
  auto* noise_opt = fit_cmd->add_option(
      "--noise", fargs.noise,
      "Fix the noise variance instead of tuning it (0 for interpolation)");

  try {
    app.parse(argc, argv);

    const bool seed_given = seed_opt->count() > 0;
    std::uint64_t resolved_seed = seed;
    if (!seed_given) {
      if (const auto env = env_seed()) resolved_seed = *env;
    }

    if (app.got_subcommand(verify)) {
      vargs.seed = resolved_seed;
      vargs.output = output;
      vargs.quiet = quiet;
      return cmd_verify(vargs);
    }
    if (app.got_subcommand(optimize)) {
      oargs.seed = seed;
      oargs.seed_given = seed_given;
      oargs.output = output;
      oargs.quiet = quiet;
      return cmd_optimize(oargs);
    }
    if (app.got_subcommand(evaluate)) {
      eargs.output = output;
      return cmd_evaluate_acq(eargs);
    }
    if (app.got_subcommand(fit_cmd)) {
      fargs.noise_given = noise_opt->count() > 0;
      fargs.output = output;
      return cmd_fit(fargs);
    }
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DomainError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
