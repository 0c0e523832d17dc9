"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The compiled extension is optional: if it failed to build (or an
NMTPREP_PURE=1 environment override is set) the pure implementation is
selected at import time.  Both expose the same function with the same
semantics; tests assert their equivalence.
"""

import os

from . import _pure

if os.environ.get("NMTPREP_PURE"):
    _impl = _pure
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _pure

apply_ranked_merges = _impl.apply_ranked_merges
IMPLEMENTATION = _impl.IMPLEMENTATION

__all__ = ["apply_ranked_merges", "IMPLEMENTATION"]
