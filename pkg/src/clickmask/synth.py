"""Synthetic infrared-like scene generator with analytically known ground truth.

Scenes are a flat background plus a few low-frequency cosine clutter modes,
white noise, and bright small targets (flat disks or Gaussian bumps).  Ground
truth comes from the noise-free target profile, so desk-scale evaluations have
an exact reference.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .annotate import Click
from .image import BinaryMask, GrayImage, save_mask
from PIL import Image

MAX_TARGET_RADIUS = 7  # keeps every target inside the 15x15 small-target regime


@dataclass
class TargetSpec:
    center: tuple[int, int]       # (row, col)
    radius: float = 4.0
    peak: float = 0.8             # absolute intensity at the target core
    profile: str = "disk"         # "disk" or "gaussian"


@dataclass
class PhantomSpec:
    size: tuple[int, int] = (128, 128)     # (height, width)
    targets: list[TargetSpec] = field(default_factory=list)
    background: float = 0.18
    clutter_amplitude: float = 0.03
    noise_sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.size, int):
            self.size = (self.size, self.size)
        self.validate()

    def validate(self):
        h, w = self.size
        if h < 8 or w < 8:
            raise ValueError("image size must be at least 8x8")
        if not 0.0 <= self.background < 1.0:
            raise ValueError("background level must lie in [0, 1)")
        if self.noise_sigma < 0 or self.clutter_amplitude < 0:
            raise ValueError("noise sigma and clutter amplitude must be >= 0")
        for t in self.targets:
            if t.radius > MAX_TARGET_RADIUS:
                raise ValueError(
                    f"target radius {t.radius} breaks the small-target regime "
                    f"(diameter must fit in 15x15 pixels, radius <= {MAX_TARGET_RADIUS})")
            if not 0.0 < t.peak <= 1.0:
                raise ValueError("peak intensity must lie in (0, 1]")
            if t.peak <= self.background + 3.0 * self.noise_sigma:
                raise ValueError(
                    "peak intensity must exceed background + 3*noise_sigma "
                    "(targets must be separable)")
            r, c = t.center
            rad = int(np.ceil(t.radius))
            if r - rad < 0 or r + rad >= h or c - rad < 0 or c + rad >= w:
                raise ValueError(f"target at {t.center} does not fit inside the image")
            if t.profile not in ("disk", "gaussian"):
                raise ValueError(f"unknown target profile {t.profile!r}")
        for a_idx in range(len(self.targets)):
            for b_idx in range(a_idx + 1, len(self.targets)):
                a, b = self.targets[a_idx], self.targets[b_idx]
                d = np.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1])
                if d <= a.radius + b.radius:
                    raise ValueError(f"targets at {a.center} and {b.center} overlap")


@dataclass
class PhantomScene:
    image: GrayImage
    gt: BinaryMask
    clicks: list[Click]


def _target_field(spec: PhantomSpec) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free target contribution and its analytic support."""
    h, w = spec.size
    bump = np.zeros((h, w))
    gt = np.zeros((h, w), dtype=bool)
    yy, xx = np.mgrid[0:h, 0:w]
    for t in spec.targets:
        d2 = (yy - t.center[0]) ** 2 + (xx - t.center[1]) ** 2
        gap = t.peak - spec.background
        if t.profile == "disk":
            support = d2 <= t.radius * t.radius
            bump = np.where(support, np.maximum(bump, gap), bump)
            gt |= support
        else:
            sig = t.radius / 2.0
            contrib = gap * np.exp(-d2 / (2.0 * sig * sig))
            bump = np.maximum(bump, contrib)
            # profile >= background + gap/2  <=>  d^2 <= 2 ln 2 sigma^2
            gt |= d2 <= 2.0 * np.log(2.0) * sig * sig
    return bump, gt


def _clutter(shape, amplitude: float, rng) -> np.ndarray:
    """Sum of a few low-frequency cosine modes, bounded by the amplitude."""
    h, w = shape
    if amplitude <= 0:
        return np.zeros(shape)
    yy, xx = np.mgrid[0:h, 0:w]
    fld = np.zeros(shape)
    for _ in range(3):
        theta = rng.uniform(0, np.pi)
        wavelength = rng.uniform(0.5, 2.0) * max(h, w)
        phase = rng.uniform(0, 2 * np.pi)
        weight = rng.uniform(0.3, 1.0)
        k = 2 * np.pi / wavelength
        fld += weight * np.cos(k * (np.cos(theta) * xx + np.sin(theta) * yy) + phase)
    peak = np.abs(fld).max()
    if peak > 0:
        fld *= amplitude / peak
    return fld


def generate(spec: PhantomSpec) -> PhantomScene:
    """Render one scene; deterministic for a given spec (seed included)."""
    rng = np.random.default_rng(spec.seed)
    bump, gt = _target_field(spec)
    img = spec.background + _clutter(spec.size, spec.clutter_amplitude, rng) + bump
    if spec.noise_sigma > 0:
        img = img + rng.normal(0.0, spec.noise_sigma, size=spec.size)
    img = np.clip(img, 0.0, 1.0)
    clicks = [Click(image_id="", x=int(t.center[1]), y=int(t.center[0]))
              for t in spec.targets]
    return PhantomScene(image=GrayImage(img), gt=BinaryMask(gt), clicks=clicks)


def default_corpus_spec() -> PhantomSpec:
    """Envelope used by generate_corpus when no base spec is given."""
    return PhantomSpec(
        size=(128, 128),
        targets=[TargetSpec(center=(64, 64), radius=4.0, peak=0.8)],
        background=0.15,
        clutter_amplitude=0.03,
        noise_sigma=0.05,
    )


def _randomize(base: PhantomSpec, rng) -> PhantomSpec:
    """One corpus scene: target count/positions/sizes drawn inside the envelope."""
    h, w = base.size
    n_targets = rng.integers(1, len(base.targets) + 1) if base.targets else 1
    template = base.targets[0] if base.targets else TargetSpec(center=(h // 2, w // 2))
    targets = []
    attempts = 0
    while len(targets) < n_targets and attempts < 200:
        attempts += 1
        radius = float(rng.integers(3, int(max(3, template.radius)) + 1))
        margin = int(np.ceil(radius)) + 2
        row = int(rng.integers(margin, h - margin))
        col = int(rng.integers(margin, w - margin))
        peak_lo = min(template.peak,
                      max(0.55, base.background + 3 * base.noise_sigma + 0.2))
        peak = float(rng.uniform(peak_lo, min(1.0, template.peak + 0.15)))
        cand = TargetSpec(center=(row, col), radius=radius, peak=peak,
                          profile=template.profile)
        if all(np.hypot(row - t.center[0], col - t.center[1]) > radius + t.radius + 2
               for t in targets):
            targets.append(cand)
    # scene difficulty varies: noise spans easy to salty within the envelope
    sigma = float(rng.uniform(0.6, 1.1) * base.noise_sigma)
    return replace(base, targets=targets, noise_sigma=sigma,
                   seed=int(rng.integers(0, 2 ** 31)))


def save_image(image: GrayImage, path) -> None:
    """Write an 8-bit grayscale PNG (values rounded to the nearest count)."""
    arr = np.clip(np.rint(image.data * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def generate_corpus(n: int, base: PhantomSpec | None, seed: int, out_dir) -> list[str]:
    """Write n scenes (image + gt mask + click rows) under out_dir.

    Layout: images/<id>.png, gt/<id>.png, clicks.csv.  Byte-identical across
    reruns with the same arguments.
    """
    if n < 1:
        raise ValueError("corpus size must be >= 1")
    base = base if base is not None else default_corpus_spec()
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "gt").mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    ids = []
    rows = []
    for k in range(n):
        scene_id = f"scene_{k:03d}"
        spec = _randomize(base, rng)
        scene = generate(spec)
        save_image(scene.image, out_dir / "images" / f"{scene_id}.png")
        save_mask(scene.gt, out_dir / "gt" / f"{scene_id}.png")
        for click in scene.clicks:
            rows.append((scene_id, click.x, click.y))
        ids.append(scene_id)

    with open(out_dir / "clicks.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "x", "y"])
        writer.writerows(rows)
    return ids
