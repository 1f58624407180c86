"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The compiled backend (:mod:`._speedups`, Cython) is preferred when its
extension module built; otherwise the numpy reference backend
(:mod:`._reference`) is used.  Both produce bit-identical results; the
choice affects speed only.  Set ``IT2GARCH_KERNEL=python`` (or ``compiled``)
to force a backend, e.g. for the kernel benchmark.
"""

from __future__ import annotations

import os

from . import _reference

try:
    from . import _speedups
except ImportError:
    _speedups = None


def available_backends() -> dict:
    """Importable backends by name; ``python`` is always present."""
    backends = {"python": _reference}
    if _speedups is not None:
        backends["compiled"] = _speedups
    return backends


def _select_default():
    forced = os.environ.get("IT2GARCH_KERNEL")
    backends = available_backends()
    if forced:
        if forced not in backends:
            raise ImportError(
                f"IT2GARCH_KERNEL={forced!r} but only {sorted(backends)} available"
            )
        return backends[forced]
    return backends.get("compiled", _reference)


_active = _select_default()


def active_backend():
    """The backend module every model computation routes through."""
    return _active


def backend_name() -> str:
    return _active.NAME


def use_backend(name: str):
    """Switch the active backend in-process; returns the previous name.

    Benchmarking/testing hook; both backends compute identical results, so
    this only changes speed.
    """
    global _active
    backends = available_backends()
    if name not in backends:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(backends)}")
    previous = _active.NAME
    _active = backends[name]
    return previous
