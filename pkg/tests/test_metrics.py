import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clickmask.image import BinaryMask, save_mask
from clickmask.metrics import MatchPolicy, evaluate_corpus, iou, pd_fa


def bm(bits):
    return BinaryMask(np.asarray(bits, dtype=bool))


# ------------------------------------------------------------------- iou

def test_iou_identical():
    a = bm(np.eye(5))
    assert iou(a, a) == 1.0


def test_iou_disjoint():
    a = np.zeros((4, 4), dtype=bool)
    b = np.zeros((4, 4), dtype=bool)
    a[0, 0] = True
    b[3, 3] = True
    assert iou(bm(a), bm(b)) == 0.0


def test_iou_half_overlap():
    pred = np.zeros((1, 2), dtype=bool)
    pred[0, :] = True
    gt = np.zeros((1, 2), dtype=bool)
    gt[0, 0] = True
    assert iou(bm(pred), bm(gt)) == 0.5


def test_iou_both_empty():
    z = np.zeros((3, 3), dtype=bool)
    assert iou(bm(z), bm(z)) == 1.0


def test_iou_dimension_mismatch():
    with pytest.raises(ValueError):
        iou(bm(np.zeros((2, 2))), bm(np.zeros((3, 3))))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 36 - 1))
def test_iou_symmetry_and_identity(seed):
    rng = np.random.default_rng(seed)
    a = bm(rng.random((8, 8)) < 0.4)
    b = bm(rng.random((8, 8)) < 0.4)
    assert iou(a, b) == iou(b, a)
    if a.count():
        assert iou(a, a) == 1.0


def test_iou_monotone_under_false_positive(rng):
    gt = bm(rng.random((10, 10)) < 0.3)
    pred = np.array(gt.data)
    before = iou(bm(pred), gt)
    empty = np.argwhere(~pred & ~gt.data)
    pred[tuple(empty[0])] = True
    assert iou(bm(pred), gt) <= before


# ------------------------------------------------------------------- pd/fa

def test_pd_fa_perfect():
    rngl = np.random.default_rng(5)
    masks = [bm(rngl.random((16, 16)) < 0.05) for _ in range(3)]
    pd, fa = pd_fa([(m, m) for m in masks])
    assert pd == 1.0 and fa == 0.0


def test_pd_fa_empty_predictions():
    gt = np.zeros((8, 8), dtype=bool)
    gt[2:4, 2:4] = True
    pd, fa = pd_fa([(bm(np.zeros((8, 8))), bm(gt))])
    assert pd == 0.0 and fa == 0.0


def test_pd_fa_handcrafted_16x16():
    """One detected blob (centroid offset 2 px) plus a 3-pixel spurious blob."""
    gt = np.zeros((16, 16), dtype=bool)
    gt[4:7, 4:7] = True                     # centroid (5, 5)
    pred = np.zeros((16, 16), dtype=bool)
    pred[6:9, 4:7] = True                   # centroid (7, 5): distance 2 <= 3
    pred[12, 12:15] = True                  # spurious 3-pixel strip
    pd, fa = pd_fa([(bm(pred), bm(gt))])
    assert pd == 1.0
    assert fa == pytest.approx(3 / 256)


def test_pd_fa_matching_is_one_to_one():
    gt = np.zeros((16, 16), dtype=bool)
    gt[2, 2] = True
    gt[2, 6] = True                          # two targets
    pred = np.zeros((16, 16), dtype=bool)
    pred[2, 4] = True                        # single blob within 3 px of both
    pd, fa = pd_fa([(bm(pred), bm(gt))])
    assert pd == 0.5                         # one prediction detects one target
    assert fa == 0.0


def test_pd_discreteness(rng):
    gts = []
    preds = []
    for k in range(4):
        gt = np.zeros((12, 12), dtype=bool)
        gt[3 * (k % 2) + 1, 4] = True
        gts.append(bm(gt))
        preds.append(bm(np.zeros((12, 12), dtype=bool)))
    pd, _ = pd_fa(list(zip(preds, gts)))
    assert pd in {0.0, 0.25, 0.5, 0.75, 1.0}


def test_fa_monotone_under_false_positive():
    gt = np.zeros((16, 16), dtype=bool)
    gt[4:6, 4:6] = True
    pred = np.array(gt)
    _, fa_before = pd_fa([(bm(pred), bm(gt))])
    pred2 = np.array(pred)
    pred2[12, 12] = True
    _, fa_after = pd_fa([(bm(pred2), bm(gt))])
    assert fa_after >= fa_before


def test_fa_all_false_pixels_variant():
    gt = np.zeros((16, 16), dtype=bool)
    gt[4:6, 4:6] = True
    pred = np.array(gt)
    pred[4:6, 6] = True  # matched component spills 2 px beyond gt
    _, fa_comp = pd_fa([(bm(pred), bm(gt))], MatchPolicy())
    _, fa_all = pd_fa([(bm(pred), bm(gt))],
                      MatchPolicy(count_all_false_pixels=True))
    assert fa_comp == 0.0
    assert fa_all == pytest.approx(2 / 256)


# ------------------------------------------------------------------- corpus

def _write_corpus(tmp_path, rng, n=6):
    pred_dir = tmp_path / "pred"
    gt_dir = tmp_path / "gt"
    pred_dir.mkdir()
    gt_dir.mkdir()
    for k in range(n):
        bits = rng.random((20, 20)) < 0.08
        save_mask(bm(bits), pred_dir / f"img_{k:02d}.png")
        save_mask(bm(bits), gt_dir / f"img_{k:02d}.png")
    return pred_dir, gt_dir


def test_corpus_self_comparison(tmp_path, rng):
    pred_dir, gt_dir = _write_corpus(tmp_path, rng)
    report = evaluate_corpus(pred_dir, gt_dir)
    assert report.mean_iou == 1.0
    assert report.pd == 1.0
    assert report.fa == 0.0


def test_corpus_mean_is_unweighted(tmp_path):
    pred_dir = tmp_path / "pred"
    gt_dir = tmp_path / "gt"
    pred_dir.mkdir()
    gt_dir.mkdir()
    blob = np.zeros((10, 10), dtype=bool)
    blob[2:5, 2:5] = True
    save_mask(bm(blob), pred_dir / "same.png")
    save_mask(bm(blob), gt_dir / "same.png")
    save_mask(bm(np.zeros((10, 10))), pred_dir / "diff.png")
    save_mask(bm(blob), gt_dir / "diff.png")
    report = evaluate_corpus(pred_dir, gt_dir)
    assert report.mean_iou == pytest.approx(0.5)


def test_corpus_unmatched_files_warn(tmp_path, rng):
    pred_dir, gt_dir = _write_corpus(tmp_path, rng, n=3)
    save_mask(bm(np.zeros((5, 5))), pred_dir / "extra.png")
    report = evaluate_corpus(pred_dir, gt_dir)
    assert any("extra" in w for w in report.warnings)
    assert len(report.per_image) == 3


def test_corpus_no_overlap_errors(tmp_path, rng):
    pred_dir = tmp_path / "pred"
    gt_dir = tmp_path / "gt"
    pred_dir.mkdir()
    gt_dir.mkdir()
    save_mask(bm(np.zeros((5, 5))), pred_dir / "a.png")
    save_mask(bm(np.zeros((5, 5))), gt_dir / "b.png")
    with pytest.raises(ValueError, match="no matching"):
        evaluate_corpus(pred_dir, gt_dir)


def test_corpus_matches_independent_counting(tmp_path, rng):
    """Mean IoU equals a from-scratch pixel count over the written files."""
    pred_dir = tmp_path / "pred"
    gt_dir = tmp_path / "gt"
    pred_dir.mkdir()
    gt_dir.mkdir()
    from PIL import Image
    expected = []
    for k in range(48):
        gt_bits = rng.random((16, 16)) < 0.1
        pred_bits = gt_bits ^ (rng.random((16, 16)) < 0.03)  # perturbation
        save_mask(bm(pred_bits), pred_dir / f"s{k:02d}.png")
        save_mask(bm(gt_bits), gt_dir / f"s{k:02d}.png")
    report = evaluate_corpus(pred_dir, gt_dir)
    total = 0.0
    for k in range(48):
        p = np.asarray(Image.open(pred_dir / f"s{k:02d}.png")) > 127
        g = np.asarray(Image.open(gt_dir / f"s{k:02d}.png")) > 127
        inter = int((p & g).sum())
        union = int((p | g).sum())
        total += (inter / union) if union else 1.0
    assert report.mean_iou == pytest.approx(total / 48, abs=1e-12)
