"""Kernel selection: compiled extension if built, numpy fallback otherwise.

Set FROBFORMS_FORCE_PY=1 to force the fallback (used by the benchmark and
by the kernel-equality tests).
"""

import os

from . import orbit_py

if os.environ.get("FROBFORMS_FORCE_PY") == "1":
    _impl = orbit_py
else:
    try:
        from . import _orbit_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = orbit_py

BACKEND = _impl.BACKEND
bfs_f2 = _impl.bfs_f2
bfs_f2_parents = _impl.bfs_f2_parents
generator_masks = orbit_py.generator_masks
apply_generator = orbit_py.apply_generator


def available_backends():
    out = ["python"]
    try:
        from . import _orbit_cy  # noqa: F401
        out.append("cython")
    except ImportError:
        pass
    return out
