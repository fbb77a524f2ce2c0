"""Click-to-mask pipeline: ROI selection around a click, level-set evolution
inside the ROI, and compositing back to a full-image pseudo-mask.

The click only chooses the window; seeding inside it is intensity-driven, so
the exact click position barely matters as long as the target lands in the ROI.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .image import (BinaryMask, GrayImage, ImageLoadError, connected_components,
                    load_image, save_mask)
from .levelset import (AllSeedPixels, EvolutionParams, NoSeedPixels, evolve,
                       extract_mask, square_seed)

DEFAULT_WINDOW = 128


@dataclass
class Click:
    image_id: str
    x: int  # pixel column
    y: int  # pixel row


@dataclass
class RoiSpec:
    left: int
    top: int
    width: int
    height: int

    def as_dict(self) -> dict:
        return {"left": self.left, "top": self.top,
                "width": self.width, "height": self.height}


@dataclass
class Variant:
    """Ablation switches; the default is the full method."""

    disable_ed: bool = False
    disable_signed_coeff: bool = False
    vanilla_init: bool = False


@dataclass
class AnnotationResult:
    mask: BinaryMask            # full image size; false outside the ROI
    roi: RoiSpec
    iterations: int
    converged: bool
    oscillating: bool
    c1: float
    c2: float
    target_components: int


@dataclass
class BatchEntry:
    image_id: str
    status: str                 # "ok" or "error"
    iterations: int = 0
    converged: bool = False
    oscillating: bool = False
    error: str | None = None


@dataclass
class BatchReport:
    entries: list[BatchEntry] = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def failures(self) -> list[BatchEntry]:
        return [e for e in self.entries if e.status != "ok"]

    def to_json(self) -> dict:
        entries = []
        for e in self.entries:
            item = {"image_id": e.image_id, "status": e.status,
                    "iterations": e.iterations, "converged": e.converged,
                    "oscillating": e.oscillating}
            if e.error:
                item["error"] = e.error
            entries.append(item)
        return {"entries": entries, "elapsed_ms": self.elapsed_ms}


def roi_for_click(image: GrayImage, click: Click, window: int = DEFAULT_WINDOW) -> RoiSpec:
    """Window x window square centered on the click, translated (never shrunk)
    to stay inside the image; undersized images are spanned fully."""
    if window < 8:
        raise ValueError("window must be >= 8")
    if image.width < 8 or image.height < 8:
        raise ValueError("image too small to annotate (minimum 8x8)")
    w = min(window, image.width)
    h = min(window, image.height)
    left = min(max(click.x - window // 2, 0), image.width - w)
    top = min(max(click.y - window // 2, 0), image.height - h)
    return RoiSpec(left=left, top=top, width=w, height=h)


def annotate(image: GrayImage, click: Click, params: EvolutionParams | None = None,
             window: int = DEFAULT_WINDOW, variant: Variant | None = None) -> AnnotationResult:
    """One cursory click to one full-image pseudo-mask."""
    params = params if params is not None else EvolutionParams()
    variant = variant if variant is not None else Variant()
    if not (0 <= click.x < image.width and 0 <= click.y < image.height):
        raise ValueError(f"click ({click.x}, {click.y}) outside image bounds")

    spec = roi_for_click(image, click, window)
    roi = image.crop(spec.top, spec.left, spec.height, spec.width)

    initial = None
    if variant.vanilla_init:
        initial = square_seed(roi, click.y - spec.top, click.x - spec.left, params)
    try:
        result = evolve(roi, params,
                        disable_ed=variant.disable_ed,
                        disable_signed_coeff=variant.disable_signed_coeff,
                        initial=initial)
    except (NoSeedPixels, AllSeedPixels) as exc:
        exc.roi = spec
        raise

    full = np.zeros((image.height, image.width), dtype=bool)
    full[spec.top:spec.top + spec.height,
         spec.left:spec.left + spec.width] = extract_mask(result.phi).data
    mask = BinaryMask(full)
    comps = connected_components(mask, 8)
    return AnnotationResult(
        mask=mask,
        roi=spec,
        iterations=result.iterations,
        converged=result.converged,
        oscillating=result.oscillating,
        c1=result.stats.c1,
        c2=result.stats.c2,
        target_components=len(comps.components),
    )


def load_clicks(path) -> list[Click]:
    """Read clicks from CSV (header image_id,x,y) or a JSON array."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json" or text.lstrip().startswith("["):
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed JSON click file {path}: {exc}") from exc
        clicks = []
        for idx, row in enumerate(rows):
            try:
                clicks.append(Click(image_id=str(row["image_id"]),
                                    x=int(row["x"]), y=int(row["y"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"malformed click entry {idx} in {path}: {exc}") from exc
        return clicks

    clicks = []
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header is None or [h.strip().lower() for h in header[:3]] != ["image_id", "x", "y"]:
        raise ValueError(f"click CSV {path} must start with header image_id,x,y")
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            clicks.append(Click(image_id=row[0].strip(), x=int(row[1]), y=int(row[2])))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"malformed click row at line {lineno} of {path}: {exc}") from exc
    return clicks


def _find_image(image_dir: Path, image_id: str) -> Path:
    for ext in (".png", ".pgm"):
        candidate = image_dir / f"{image_id}{ext}"
        if candidate.exists():
            return candidate
    raise ImageLoadError(f"no image file for id {image_id!r} under {image_dir}")


def _annotate_group(image_dir: Path, out_dir: Path, image_id: str,
                    clicks: list[Click], params: EvolutionParams, window: int,
                    variant: Variant | None) -> list[BatchEntry]:
    entries = []
    try:
        image = load_image(_find_image(image_dir, image_id))
    except ImageLoadError as exc:
        return [BatchEntry(image_id=image_id, status="error", error=str(exc))
                for _ in clicks]

    union = np.zeros((image.height, image.width), dtype=bool)
    any_ok = False
    for click in clicks:
        try:
            res = annotate(image, click, params, window, variant)
        except (NoSeedPixels, AllSeedPixels, ValueError) as exc:
            entries.append(BatchEntry(image_id=image_id, status="error", error=str(exc)))
            continue
        union |= res.mask.data
        any_ok = True
        entries.append(BatchEntry(image_id=image_id, status="ok",
                                  iterations=res.iterations,
                                  converged=res.converged,
                                  oscillating=res.oscillating))
    if any_ok:
        save_mask(BinaryMask(union), out_dir / f"{image_id}.png")
    return entries


def batch_annotate(clicks: list[Click], image_dir, out_dir,
                   params: EvolutionParams | None = None,
                   window: int = DEFAULT_WINDOW, workers: int = 1,
                   variant: Variant | None = None) -> BatchReport:
    """Annotate a click list against a directory of images.

    One mask PNG per annotated image id (multiple clicks union); failures are
    reported per click entry and never abort the batch.
    """
    params = params if params is not None else EvolutionParams()
    image_dir = Path(image_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    groups: dict[str, list[Click]] = {}
    for click in clicks:
        groups.setdefault(click.image_id, []).append(click)

    started = time.perf_counter()
    results: dict[str, list[BatchEntry]] = {}
    if workers > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                image_id: pool.submit(_annotate_group, image_dir, out_dir, image_id,
                                      group, params, window, variant)
                for image_id, group in groups.items()
            }
            for image_id, fut in futures.items():
                results[image_id] = fut.result()
    else:
        for image_id, group in groups.items():
            results[image_id] = _annotate_group(image_dir, out_dir, image_id,
                                                group, params, window, variant)

    report = BatchReport()
    for image_id in sorted(groups):
        report.entries.extend(results[image_id])
    report.elapsed_ms = (time.perf_counter() - started) * 1000.0
    return report
