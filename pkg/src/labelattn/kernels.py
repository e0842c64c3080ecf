"""Backend selection for the window kernels.

Prefers the compiled extension when it imported cleanly; set
LABELATTN_KERNELS=python to force the numpy fallback (e.g. for the
benchmark comparison).
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["c"] = _ckernels

_forced = os.environ.get("LABELATTN_KERNELS")
if _forced:
    if _forced not in BACKENDS:
        raise ImportError(f"LABELATTN_KERNELS={_forced!r} not available "
                          f"(choices: {sorted(BACKENDS)})")
    BACKEND = _forced
else:
    BACKEND = "c" if _ckernels is not None else "python"

_impl = BACKENDS[BACKEND]

window_scores = _impl.window_scores
window_scores_backward = _impl.window_scores_backward
