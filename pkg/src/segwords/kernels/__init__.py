"""Kernel backend selection.

The compiled extension (segwords._ext, Cython) and the numpy fallback
(segwords.kernels.pure) implement the same two functions. One backend is
chosen once, at import time:

    SEGWORDS_BACKEND=auto      compiled when built, else pure (default)
    SEGWORDS_BACKEND=compiled  require the extension, fail if missing
    SEGWORDS_BACKEND=pure      force the numpy fallback
"""

from __future__ import annotations

import os

from . import pure

LOG_FLOOR = pure.LOG_FLOOR


def _compiled_module():
    try:
        from segwords import _ext
    except ImportError:
        return None
    return _ext


def select_backend(name: str):
    """Resolve a backend name to (module, resolved_name)."""
    name = name.strip().lower() or "auto"
    if name == "pure":
        return pure, "pure"
    compiled = _compiled_module()
    if name == "compiled":
        if compiled is None:
            raise ImportError(
                "SEGWORDS_BACKEND=compiled but the segwords._ext extension is not built"
            )
        return compiled, "compiled"
    if name != "auto":
        raise ValueError(f"unknown backend {name!r}; expected auto, compiled, or pure")
    if compiled is not None:
        return compiled, "compiled"
    return pure, "pure"


_impl, BACKEND = select_backend(os.environ.get("SEGWORDS_BACKEND", "auto"))

frame_features = _impl.frame_features
frame_label_codes = _impl.frame_label_codes
