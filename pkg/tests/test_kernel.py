"""Backend selection and parity between the compiled and pure-Python kernels."""

import numpy as np
import pytest

from clickmask import _kernel
from clickmask._kernel import reference


def _has_compiled():
    try:
        from clickmask._kernel import _speedup  # noqa: F401
        return True
    except ImportError:
        return False


needs_compiled = pytest.mark.skipif(not _has_compiled(),
                                    reason="compiled kernel not built")


def test_some_backend_is_active():
    assert _kernel.backend_name() in ("compiled", "python")


@needs_compiled
def test_kernels_agree_elementwise(rng):
    from clickmask._kernel import _speedup
    for _ in range(10):
        h, w = rng.integers(2, 40, size=2)
        phi = np.ascontiguousarray(rng.uniform(-2, 2, (h, w)))
        g = np.ascontiguousarray(rng.uniform(0.3, 1.0, (h, w)))
        mu, ac, ec, eps = 0.2, float(rng.uniform(-1.5, 1.5)), float(rng.uniform(0, 3)), 1.5
        fp = reference.step_forces(phi, g, mu, ac, ec, eps)
        fc = _speedup.step_forces(phi, g, mu, ac, ec, eps)
        np.testing.assert_allclose(fc, fp, rtol=1e-13, atol=1e-15)


@needs_compiled
def test_kernels_agree_on_binary_plateaus(rng):
    from clickmask._kernel import _speedup
    phi = np.where(rng.random((64, 64)) < 0.3, -1.0, 1.0)
    g = np.ascontiguousarray(rng.uniform(0.5, 1.0, (64, 64)))
    fp = reference.step_forces(phi, g, 0.2, -0.1, 0.7, 1.5)
    fc = _speedup.step_forces(phi, g, 0.2, -0.1, 0.7, 1.5)
    np.testing.assert_allclose(fc, fp, rtol=1e-13, atol=1e-15)


def test_python_backend_env_override():
    import os
    import subprocess
    import sys
    code = "import clickmask._kernel as k; print(k.backend_name())"
    env = dict(os.environ, CLICKMASK_KERNEL="python")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True)
    assert out.stdout.strip() == "python"


def test_divergence_is_adjoint_of_gradient(rng):
    """<grad f, v> == -<f, div v> for the zero-flux pair, any sizes."""
    for _ in range(5):
        h, w = rng.integers(2, 12, size=2)
        f = rng.standard_normal((h, w))
        vx = rng.standard_normal((h, w))
        vy = rng.standard_normal((h, w))
        gx, gy = reference.grad_central(f)
        lhs = (gx * vx + gy * vy).sum()
        rhs = -(f * reference.div_zero_flux(vx, vy)).sum()
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
