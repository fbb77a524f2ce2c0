import numpy as np
import pytest

from clickmask.image import BinaryMask, GrayImage


def disk_phantom(n=128, center=None, radius=4, peak=0.9, background=0.2,
                 sigma=0.05, seed=11):
    """Flat disk on flat background plus white noise; gt is the analytic disk."""
    rng = np.random.default_rng(seed)
    if center is None:
        center = (n // 2, n // 2)
    img = np.full((n, n), background)
    yy, xx = np.mgrid[0:n, 0:n]
    d2 = (yy - center[0]) ** 2 + (xx - center[1]) ** 2
    gt = d2 <= radius * radius
    img[gt] = peak
    img = np.clip(img + rng.normal(0.0, sigma, size=(n, n)), 0.0, 1.0)
    return GrayImage(img), BinaryMask(gt)


def mask_iou(a: BinaryMask, b: BinaryMask) -> float:
    union = (a.data | b.data).sum()
    return float((a.data & b.data).sum() / union) if union else 1.0


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
