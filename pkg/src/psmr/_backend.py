"""Selects the kernel implementation at import time.

The compiled ``_kernels`` extension is used when importable; setting
``PSMR_BACKEND=python`` forces the numpy fallback.
"""

import os

from . import _fallback

if os.environ.get("PSMR_BACKEND", "").lower() == "python":
    kernels = _fallback
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _fallback

BACKEND: str = kernels.NAME

hash_bytes = kernels.hash_bytes
hash_keys = kernels.hash_keys
window_collisions = kernels.window_collisions
batch_window_conflicts = kernels.batch_window_conflicts
