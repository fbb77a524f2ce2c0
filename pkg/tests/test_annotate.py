import json

import numpy as np
import pytest

from clickmask.annotate import (Click, Variant, annotate, batch_annotate,
                                load_clicks, roi_for_click)
from clickmask.image import GrayImage, load_mask
from clickmask.levelset import EvolutionParams, NoSeedPixels
from clickmask.synth import PhantomSpec, TargetSpec, generate, save_image
from conftest import disk_phantom, mask_iou


def big_phantom(seed=11):
    return disk_phantom(n=256, center=(128, 128), seed=seed)


# ------------------------------------------------------------- roi placement

def test_roi_centered_fit():
    img = GrayImage(np.zeros((256, 256)) + 0.1)
    roi = roi_for_click(img, Click("a", 128, 128), 128)
    assert (roi.left, roi.top, roi.width, roi.height) == (64, 64, 128, 128)


def test_roi_corner_clamp():
    img = GrayImage(np.zeros((256, 256)) + 0.1)
    roi = roi_for_click(img, Click("a", 0, 0), 128)
    assert (roi.left, roi.top, roi.width, roi.height) == (0, 0, 128, 128)


def test_roi_undersized_image():
    img = GrayImage(np.zeros((100, 100)) + 0.1)
    roi = roi_for_click(img, Click("a", 50, 50), 128)
    assert (roi.left, roi.top, roi.width, roi.height) == (0, 0, 100, 100)


def test_roi_rejects_tiny_images_and_windows():
    img = GrayImage(np.zeros((100, 100)) + 0.1)
    with pytest.raises(ValueError, match="window"):
        roi_for_click(img, Click("a", 5, 5), 4)
    tiny = GrayImage(np.zeros((4, 4)) + 0.1)
    with pytest.raises(ValueError, match="too small"):
        roi_for_click(tiny, Click("a", 1, 1), 16)


# ------------------------------------------------------------- annotate

def test_annotate_center_click_hits_disk():
    img, gt = big_phantom()
    res = annotate(img, Click("p", 128, 128))
    assert res.converged
    assert res.target_components >= 1
    assert mask_iou(res.mask, gt) >= 0.8


def test_annotate_offset_click_same_mask():
    img, gt = big_phantom()
    center = annotate(img, Click("p", 128, 128))
    offset = annotate(img, Click("p", 138, 128))
    assert mask_iou(center.mask, offset.mask) >= 0.95


def test_annotate_no_seed_carries_roi():
    img = GrayImage(np.full((64, 64), 0.05))
    with pytest.raises(NoSeedPixels) as info:
        annotate(img, Click("d", 32, 32))
    assert info.value.roi is not None
    assert info.value.roi.width == 64


def test_annotate_out_of_bounds_click():
    img, _ = big_phantom()
    with pytest.raises(ValueError, match="outside image bounds"):
        annotate(img, Click("p", -1, 5))


def test_annotate_mask_false_outside_roi():
    img, _ = big_phantom()
    res = annotate(img, Click("p", 20, 20))  # ROI far from the disk? still local
    outside = res.mask.data.copy()
    outside[res.roi.top:res.roi.top + res.roi.height,
            res.roi.left:res.roi.left + res.roi.width] = False
    assert not outside.any()


def test_annotate_idempotent():
    img, _ = big_phantom()
    a = annotate(img, Click("p", 128, 128))
    b = annotate(img, Click("p", 128, 128))
    assert (a.mask.data == b.mask.data).all()
    assert a.iterations == b.iterations


def test_annotate_vanilla_variant_square_seed():
    img, _ = big_phantom()
    params = EvolutionParams(max_iters=0)
    res = annotate(img, Click("p", 128, 128), params,
                   variant=Variant(vanilla_init=True))
    # zero-budget run returns the seed itself: a 13x13 square at the click
    assert res.mask.count() == 13 * 13
    rows, cols = np.nonzero(res.mask.data)
    assert rows.min() == 122 and rows.max() == 134


# ------------------------------------------------------------- click files

def test_load_clicks_csv(tmp_path):
    path = tmp_path / "clicks.csv"
    path.write_text("image_id,x,y\nimg_a,10,20\nimg_b,3,4\n", encoding="utf-8")
    clicks = load_clicks(path)
    assert clicks == [Click("img_a", 10, 20), Click("img_b", 3, 4)]


def test_load_clicks_json(tmp_path):
    path = tmp_path / "clicks.json"
    path.write_text(json.dumps([{"image_id": "a", "x": 1, "y": 2}]), encoding="utf-8")
    assert load_clicks(path) == [Click("a", 1, 2)]


def test_load_clicks_malformed_row_names_line(tmp_path):
    path = tmp_path / "clicks.csv"
    path.write_text("image_id,x,y\nok,1,2\nbad,not_a_number,3\n", encoding="utf-8")
    with pytest.raises(ValueError, match="line 3"):
        load_clicks(path)


def test_load_clicks_missing_header(tmp_path):
    path = tmp_path / "clicks.csv"
    path.write_text("id,col,row\nx,1,2\n", encoding="utf-8")
    with pytest.raises(ValueError, match="header"):
        load_clicks(path)


# ------------------------------------------------------------- batch

def _write_scene(dirpath, image_id, seed):
    spec = PhantomSpec(size=(96, 96),
                       targets=[TargetSpec(center=(48, 48), radius=4, peak=0.85)],
                       background=0.15, clutter_amplitude=0.0, noise_sigma=0.04,
                       seed=seed)
    scene = generate(spec)
    save_image(scene.image, dirpath / f"{image_id}.png")
    return scene


def test_batch_empty_clicks(tmp_path):
    out = tmp_path / "out"
    report = batch_annotate([], tmp_path, out)
    assert report.entries == []
    assert not any(out.glob("*.png"))


def test_batch_two_phantoms(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    _write_scene(images, "a", 1)
    _write_scene(images, "b", 2)
    out = tmp_path / "masks"
    report = batch_annotate([Click("a", 48, 48), Click("b", 48, 48)], images, out)
    assert len(report.entries) == 2
    assert all(e.status == "ok" and e.converged for e in report.entries)
    assert (out / "a.png").exists() and (out / "b.png").exists()


def test_batch_partial_failure(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    _write_scene(images, "a", 1)
    out = tmp_path / "masks"
    clicks = [Click("a", 48, 48), Click("missing", 5, 5), Click("a", 500, 500)]
    report = batch_annotate(clicks, images, out)
    assert len(report.entries) == 3
    failures = report.failures
    assert len(failures) == 2
    assert (out / "a.png").exists()
    assert not (out / "missing.png").exists()


def test_batch_multi_click_union(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    spec = PhantomSpec(size=(200, 96),
                       targets=[TargetSpec(center=(40, 48), radius=4, peak=0.85),
                                TargetSpec(center=(160, 48), radius=3, peak=0.8)],
                       background=0.15, clutter_amplitude=0.0, noise_sigma=0.03,
                       seed=8)
    scene = generate(spec)
    save_image(scene.image, images / "two.png")
    out = tmp_path / "masks"
    report = batch_annotate([Click("two", 48, 40), Click("two", 48, 160)],
                            images, out)
    assert all(e.status == "ok" for e in report.entries)
    mask = load_mask(out / "two.png")
    assert mask_iou(mask, scene.gt) >= 0.8


def test_batch_deterministic_files(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    for k in range(3):
        _write_scene(images, f"s{k}", k)
    clicks = [Click(f"s{k}", 48, 48) for k in range(3)]
    out1 = tmp_path / "m1"
    out2 = tmp_path / "m2"
    batch_annotate(clicks, images, out1, workers=2)
    batch_annotate(clicks, images, out2, workers=2)
    for k in range(3):
        assert (out1 / f"s{k}.png").read_bytes() == (out2 / f"s{k}.png").read_bytes()
