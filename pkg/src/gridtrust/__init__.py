"""gridtrust: deterministic grid-search trust experiment and analysis pipeline.

Subpackages:
  sim       deterministic task simulation (world, kinematics, searchers)
  design    blocked factorial schedule, questionnaire, trust normalization
  synth     bot subjects and ground-truth trust generators
  ts        time-series estimation (OLS, ARMA likelihood, ARIMAX, AIC)
  server    session service, storage and HTTP endpoints
  pipeline  exclusion, series building, analysis and table rendering
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
