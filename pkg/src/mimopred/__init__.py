"""Channel prediction, CSIT feedback and scheduling for a multiuser
MIMO-OFDM downlink."""
from .errors import ConfigurationError
from .kernels import BACKEND
from .sim import ScenarioConfig, UserSpec, preset, run, run_schedulers, summarize

__version__ = "0.1.0"

__all__ = ["BACKEND", "ConfigurationError", "ScenarioConfig", "UserSpec",
           "preset", "run", "run_schedulers", "summarize", "__version__"]
