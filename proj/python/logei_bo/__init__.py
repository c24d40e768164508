"""Expected-improvement Bayesian optimization over a Matern-5/2 GP.

Thin python surface over the compiled core: closed-form EI / logEI /
log-of-EI acquisition values, their quadrature and Monte Carlo oracles,
GP fitting and prediction, and the full optimization loop.
"""

try:
    from logei_bo import _core
except ImportError:  # development builds put _core next to the build tree
    import _core

__version__ = _core.__version__

DomainError = _core.DomainError
ShapeError = _core.ShapeError
NumericError = _core.NumericError
IoError = _core.IoError

ei = _core.ei
logei = _core.logei
log_of_ei = _core.log_of_ei
normal_pdf = _core.normal_pdf
normal_cdf = _core.normal_cdf
log_normal_cdf = _core.log_normal_cdf
ei_integral = _core.ei_integral
logei_integral = _core.logei_integral
ei_mc = _core.ei_mc
GPModel = _core.GPModel
fit_gp = _core.fit_gp
fit_gp_tuned = _core.fit_gp_tuned
log_marginal_likelihood = _core.log_marginal_likelihood
suggest = _core.suggest
run_bo = _core.run_bo
run_problem = _core.run_problem
problems = _core.problems

__all__ = [
    "DomainError",
    "GPModel",
    "IoError",
    "NumericError",
    "ShapeError",
    "ei",
    "ei_integral",
    "ei_mc",
    "fit_gp",
    "fit_gp_tuned",
    "log_marginal_likelihood",
    "log_normal_cdf",
    "log_of_ei",
    "logei",
    "logei_integral",
    "normal_cdf",
    "normal_pdf",
    "problems",
    "run_bo",
    "run_problem",
    "suggest",
]
