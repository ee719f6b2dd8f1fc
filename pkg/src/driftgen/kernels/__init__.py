"""Hot inner-loop kernels: predicate scans and KDE mixture sampling.

A compiled Cython implementation is preferred when the extension built;
otherwise the numpy fallback is used. Both produce bit-identical output
(all random draws happen outside the kernels), so backend choice never
affects results, only speed. Set DRIFTGEN_KERNELS=python to force the
fallback, DRIFTGEN_KERNELS=compiled to require the extension.
"""

from __future__ import annotations

import os

from . import _pykernels

_mode = os.environ.get("DRIFTGEN_KERNELS", "auto")

if _mode == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _mode == "compiled":
            raise
        _impl = _pykernels
        BACKEND = "python"

predicate_count = _impl.predicate_count
predicate_mask = _impl.predicate_mask
mixture_sample = _impl.mixture_sample

__all__ = ["BACKEND", "predicate_count", "predicate_mask", "mixture_sample"]
