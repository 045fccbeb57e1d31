"""Kernel backend dispatch.

The compiled Cython backend (`apfree.kernels._native`) is preferred when it
imported cleanly; otherwise the pure-Python reference backend is used. Both
implement the same operations with identical semantics and identical RNG
consumption, so results never depend on the backend, only speed does.

Set APFREE_BACKEND=pure or =native to force a choice (the latter raises if
the extension is unavailable).
"""

from __future__ import annotations

import os

from . import pure as _pure

_requested = os.environ.get("APFREE_BACKEND", "auto").strip().lower()

if _requested == "pure":
    _impl = _pure
elif _requested == "native":
    from . import _native as _impl  # type: ignore[no-redef]
elif _requested in ("", "auto"):
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure
else:
    raise RuntimeError(f"APFREE_BACKEND must be auto|native|pure, got {_requested!r}")

BACKEND: str = _impl.BACKEND

block_member_bulk = _impl.block_member_bulk
orbit_members = _impl.orbit_members
orbit_first_bad = _impl.orbit_first_bad
sample_triples = _impl.sample_triples
count_aps_pairscan = _impl.count_aps_pairscan

#: maximum modulus every backend supports without overflow (the native
#: backend does penalty arithmetic in 128-bit integers)
MAX_MODULUS = 1 << 61


def get_backend(name: str):
    """Return a specific backend module ("pure" or "native"); for benchmarks
    and equivalence tests."""
    if name == "pure":
        return _pure
    if name == "native":
        from . import _native

        return _native
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> tuple[str, ...]:
    try:
        from . import _native  # noqa: F401
    except ImportError:
        return ("pure",)
    return ("pure", "native")
