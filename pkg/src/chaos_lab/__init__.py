"""Operator-size dynamics of Brownian Majorana clusters.

``model`` builds master-equation generators, ``evolver`` integrates them,
``analytics`` holds large-N and 1/N closed forms, ``stochastic`` the Monte
Carlo engines and ``cli`` the command-line front end.
"""
from .errors import (ChaosLabError, ConfigurationError, DegeneracyError, DomainError, FitError,
                     IntegrationError, NumericError)
from .evolver import (ChainTrajectory, EvolveConfig, TimeSeries, evolve_chain_exact, evolve_dot,
                      generating_function, otoc_curve, otoc_curves, otoc_moment)
from .model import (ChainModel, DotModel, SizeDistribution, SizeGrid, build_dot_generator,
                    chain_rates, chain_transitions)

__version__ = "0.1.0"

__all__ = [
    "ChaosLabError", "ConfigurationError", "DegeneracyError", "DomainError", "FitError",
    "IntegrationError", "NumericError", "ChainTrajectory", "EvolveConfig", "TimeSeries",
    "evolve_chain_exact", "evolve_dot", "generating_function", "otoc_curve", "otoc_curves",
    "otoc_moment", "ChainModel", "DotModel", "SizeDistribution", "SizeGrid",
    "build_dot_generator", "chain_rates", "chain_transitions", "__version__",
]
