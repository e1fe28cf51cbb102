"""Tick-kernel backend selection.

Importing this module picks the compiled kernel when the extension built,
otherwise the numpy fallback.  ``SPIKEARM_BACKEND=c|py`` forces a choice
(``c`` raises if the extension is unavailable).
"""

from __future__ import annotations

import os

from .errors import ConfigError

_ENV = "SPIKEARM_BACKEND"


def _load():
    choice = os.environ.get(_ENV, "auto")
    if choice not in ("auto", "c", "py"):
        raise ConfigError(f"{_ENV} must be 'c' or 'py', got {choice!r}")
    if choice in ("auto", "c"):
        try:
            from . import _kernel
            return _kernel
        except ImportError:
            if choice == "c":
                raise
    from . import _kernel_py
    return _kernel_py


kernel = _load()
BACKEND_NAME: str = kernel.BACKEND


def available_backends() -> list[str]:
    names = []
    try:
        from . import _kernel  # noqa: F401
        names.append("c")
    except ImportError:
        pass
    names.append("py")
    return names


def load_backend(name: str):
    """Explicitly load one backend module (used by the benchmark and tests)."""
    if name == "c":
        from . import _kernel
        return _kernel
    if name == "py":
        from . import _kernel_py
        return _kernel_py
    raise ConfigError(f"unknown backend {name!r}")
