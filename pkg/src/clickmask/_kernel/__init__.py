"""Evolution kernel with a compiled fast path and a pure-Python fallback.

The compiled extension is preferred when importable; set CLICKMASK_KERNEL to
"python" or "compiled" to force a backend (the latter raises if unavailable).
"""

import os

from . import reference

_choice = os.environ.get("CLICKMASK_KERNEL", "").strip().lower()

if _choice == "python":
    _impl = reference
elif _choice == "compiled":
    from . import _speedup as _impl  # ImportError here means the extension is not built
else:
    try:
        from . import _speedup as _impl
    except ImportError:
        _impl = reference

step_forces = _impl.step_forces
BACKEND = _impl.BACKEND

grad_central = reference.grad_central
div_zero_flux = reference.div_zero_flux
double_well_ratio = reference.double_well_ratio


def backend_name() -> str:
    """Which kernel implementation is active: "compiled" or "python"."""
    return BACKEND
