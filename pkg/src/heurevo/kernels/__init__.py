"""Kernel backend selection.

The compiled extension is used when it imported cleanly; the pure-Python
twin is the fallback and the semantic reference. Both produce bit-identical
results. Set HEUREVO_PURE=1 before import to force the pure backend.
"""

from __future__ import annotations

import os

from heurevo.kernels import pure

_FORCE_PURE = os.environ.get("HEUREVO_PURE", "") == "1"

if _FORCE_PURE:
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from heurevo.kernels import _speedups as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

gls_run = _impl.gls_run
aco_bpp_run = _impl.aco_bpp_run
aco_mkp_run = _impl.aco_mkp_run


def available_backends() -> dict[str, object]:
    """Importable backends by name, for equivalence tests and benchmarks."""
    backends: dict[str, object] = {"pure": pure}
    try:
        from heurevo.kernels import _speedups

        backends["compiled"] = _speedups
    except ImportError:
        pass
    return backends


__all__ = [
    "BACKEND",
    "aco_bpp_run",
    "aco_mkp_run",
    "available_backends",
    "gls_run",
]
