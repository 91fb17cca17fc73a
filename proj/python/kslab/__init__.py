"""Python interface to the kslab chemotaxis solver.

Configurations and plans may be given as dicts or JSON text. Reports come back as dicts.
"""

import json as _json

from . import _kslab
from ._kslab import ConfigError, Error, PreconditionError, homogeneous_steady_state, source

__all__ = [
    "ConfigError",
    "Error",
    "PreconditionError",
    "canonical_config",
    "check_eta_interpolation",
    "check_gn",
    "check_sequence_lemma",
    "convergence",
    "energy_y",
    "homogeneous_steady_state",
    "lq_norm",
    "run",
    "simulate",
    "source",
    "sweep",
]


def _text(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def canonical_config(config):
    return _json.loads(_kslab.canonical_config(_text(config)))


def run(config):
    """Run in memory. Returns the summary plus the record series and the final fields."""
    out = _kslab.run(_text(config))
    out["summary"] = _json.loads(out["summary"])
    return out


def simulate(config, out_dir):
    return _json.loads(_kslab.simulate(_text(config), str(out_dir)))


def sweep(plan, out_dir):
    return _json.loads(_kslab.sweep(_text(plan), str(out_dir)))


def convergence(config, levels=3, kind="space"):
    return _json.loads(_kslab.convergence(_text(config), levels, kind))


def energy_y(config, u, v, k=1.0):
    return _kslab.energy_y(_text(config), u, v, k)


def lq_norm(config, u, q):
    return _kslab.lq_norm(_text(config), u, q)


def check_sequence_lemma(a, b, u1):
    return _json.loads(_kslab.check_sequence_lemma(list(a), list(b), u1))


def check_gn(n, kind, count=100, seed=1, p=4.0, q=2.0, r=2.0, s=1.0):
    return _json.loads(_kslab.check_gn(n, kind, count, seed, p, q, r, s))


def check_eta_interpolation(n, kind, count=100, seed=1, etas=(0.01, 0.1, 0.5, 0.9)):
    return _json.loads(_kslab.check_eta_interpolation(n, kind, count, seed, list(etas)))
