"""GA hot kernels: compiled extension when built, numpy fallback otherwise.

Set TESTRANK_KERNEL=python or TESTRANK_KERNEL=compiled to force a backend.
"""

import os

_forced = os.environ.get("TESTRANK_KERNEL")

if _forced == "python":
    from . import _py as _impl
elif _forced == "compiled":
    from . import _ga as _impl  # raises ImportError if the extension is missing
else:
    try:
        from . import _ga as _impl
    except ImportError:
        from . import _py as _impl

BACKEND = _impl.BACKEND
fitness_batch = _impl.fitness_batch
ox1_batch = _impl.ox1_batch
