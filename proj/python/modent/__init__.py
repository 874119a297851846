"""Python bindings for the modent library."""

import json as _json

from ._modent import (
    ConfigError,
    Error,
    IoError,
    NumericalError,
    Space,
    abelian_entropy,
    abelian_space,
    arcoth,
    commands,
    decompose,
    entropy,
    oscillator_entropy,
    oscillator_space,
    purify,
    u1_entropy,
    validate,
)
from ._modent import run as _run

__version__ = "0.3.0"


def run(command, config, out, seed=None, threads=1, tol_overrides=()):
    """Run a CLI command in-process. Returns the result dict with a parsed summary."""
    r = _run(command, str(config), str(out), seed, threads, list(tol_overrides))
    r["summary"] = _json.loads(r["summary"]) if r["summary"] not in ("", "null") else None
    return r


__all__ = [
    "ConfigError",
    "Error",
    "IoError",
    "NumericalError",
    "Space",
    "abelian_entropy",
    "abelian_space",
    "arcoth",
    "commands",
    "decompose",
    "entropy",
    "oscillator_entropy",
    "oscillator_space",
    "purify",
    "run",
    "u1_entropy",
    "validate",
]
