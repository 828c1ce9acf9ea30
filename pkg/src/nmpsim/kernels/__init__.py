"""Probe-sampling kernels: compiled backend with pure-Python fallback.

The compiled extension is selected automatically when it was built;
``NMPSIM_KERNEL=pure`` forces the fallback. Both backends produce
bit-identical results, so traces do not depend on which one is active.
"""

from __future__ import annotations

import os

from . import pure

_FORCED = os.environ.get("NMPSIM_KERNEL", "").strip().lower()

if _FORCED == "pure":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        if _FORCED == "native":
            raise
        _impl = pure
        BACKEND = "pure"

sweep_delays = _impl.sweep_delays
gaussian_at = _impl.gaussian_at


def backend_name() -> str:
    """Which backend is live: ``native`` or ``pure``."""
    return BACKEND
