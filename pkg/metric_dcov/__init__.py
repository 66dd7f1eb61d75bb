from . import estimators, inference, metric_core, negtype, population
from .version import __version__

__all__ = ["estimators", "inference", "metric_core", "negtype", "population", "__version__"]
