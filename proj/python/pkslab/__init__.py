"""Python front end to the pkslab C++ library.

Configs are dicts of dotted keys (``"phys.A"``) to values; anything not given keeps its default.
"""

from . import _pkslab
from ._pkslab import ConfigError, OdeDomainError, __version__, mass_threshold, mass_class, suite_names

__all__ = [
    "ConfigError",
    "OdeDomainError",
    "__version__",
    "default_config",
    "simulate",
    "verify",
    "ode",
    "kernel",
    "mass_threshold",
    "mass_class",
    "suite_names",
    "run_csv_columns",
]


def _settings(config=None, **overrides):
    s = {}
    for src in (config or {}), overrides:
        for k, v in src.items():
            k = k.replace("__", ".")  # allow simulate(phys__A=100)
            if isinstance(v, bool):
                v = "true" if v else "false"
            s[k] = str(v)
    return s


def default_config():
    return _pkslab.default_config()


def resolve_config(config=None, **overrides):
    return _pkslab.resolve_config(_settings(config, **overrides))


def simulate(config=None, **overrides):
    """Run one simulation; returns status, reason, steps, records (run.csv columns), fit and checks."""
    return _pkslab.simulate(_settings(config, **overrides))


def verify(suite="all", config=None, **overrides):
    return _pkslab.verify(suite, _settings(config, **overrides))


def ode(h0, m1=1.0, A=1.0, c1=2**0.5, t_max=0.0):
    return _pkslab.ode(h0, m1, A, c1, t_max)


def kernel(k, A, b, t):
    k1, k2, k3 = k
    return _pkslab.kernel(k1, k2, k3, A, b, list(t))


def run_csv_columns():
    return _pkslab.run_csv_columns()
