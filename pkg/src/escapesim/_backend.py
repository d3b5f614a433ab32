"""Kernel backend selection.

The compiled core (escapesim._core, Cython) and the pure-Python twin
(escapesim._pycore) expose the same module-level API and produce bit-identical
traces. Selection honors ESCAPE_SIM_BACKEND = auto | compiled | python
(default auto: compiled when importable). Extended-precision runs always use
the pure twin regardless (MPFR scalars cannot flow through C doubles).
"""

from __future__ import annotations

import os

from . import _pycore
from .errors import ConfigError

try:
    from . import _core
except ImportError:  # pure-Python install
    _core = None

if _core is not None and not hasattr(_core, "make_state"):
    _core = None


def active():
    pref = os.environ.get("ESCAPE_SIM_BACKEND", "auto")
    if pref == "python":
        return _pycore
    if pref == "compiled":
        if _core is None:
            raise ConfigError("ESCAPE_SIM_BACKEND=compiled but escapesim._core is not built")
        return _core
    if pref != "auto":
        raise ConfigError(f"ESCAPE_SIM_BACKEND must be auto|compiled|python, got {pref!r}")
    return _core if _core is not None else _pycore


def backend_name() -> str:
    return active().BACKEND_NAME


def compiled_available() -> bool:
    return _core is not None
