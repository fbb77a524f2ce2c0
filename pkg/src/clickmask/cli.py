"""Command-line entry point: batch annotation, corpus evaluation, the ablation
ladder, synthetic-data generation, and the interactive service."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

from .annotate import Variant, annotate as run_annotation, batch_annotate, load_clicks
from .image import ImageLoadError, load_image, load_mask
from .levelset import AllSeedPixels, EvolutionParams, NoSeedPixels
from .metrics import MatchPolicy, evaluate_corpus, write_report
from . import synth as synth_mod

_PARAM_KEYS = [f.name for f in dc_fields(EvolutionParams)]


@dataclass
class Config:
    """Effective configuration: evolution constants plus pipeline knobs.

    Config files are flat JSON; keys mirror the EvolutionParams field names
    (c0, i, mu, alpha, beta, delta, epsilon, dt, ...) so the method constants
    stay greppable.
    """

    params: EvolutionParams = field(default_factory=EvolutionParams)
    window: int = 128
    centroid_dist: float = 3.0
    workers: int = 1
    seed: int = 0
    disable_ed: bool = False
    disable_signed_coeff: bool = False
    vanilla_init: bool = False

    def variant(self) -> Variant:
        return Variant(disable_ed=self.disable_ed,
                       disable_signed_coeff=self.disable_signed_coeff,
                       vanilla_init=self.vanilla_init)

    def to_json(self) -> dict:
        out = {k: getattr(self.params, k) for k in _PARAM_KEYS}
        out.update({
            "window": self.window, "centroid_dist": self.centroid_dist,
            "workers": self.workers, "seed": self.seed,
            "disable_ed": self.disable_ed,
            "disable_signed_coeff": self.disable_signed_coeff,
            "vanilla_init": self.vanilla_init,
        })
        return out


def build_config(args) -> Config:
    """Layer config sources: defaults, then --config file, then CLI flags."""
    values: dict = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SystemExit(f"cannot read config {args.config}: {exc}")
        unknown = set(values) - set(_PARAM_KEYS) - {
            "window", "centroid_dist", "workers", "seed",
            "disable_ed", "disable_signed_coeff", "vanilla_init"}
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")

    for key in _PARAM_KEYS + ["window", "centroid_dist", "workers", "seed",
                              "disable_ed", "disable_signed_coeff", "vanilla_init"]:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    param_values = {k: v for k, v in values.items() if k in _PARAM_KEYS}
    try:
        params = EvolutionParams(**param_values)
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"invalid parameters: {exc}")

    cfg = Config(params=params)
    for key in ("window", "centroid_dist", "workers", "seed",
                "disable_ed", "disable_signed_coeff", "vanilla_init"):
        if key in values:
            setattr(cfg, key, type(getattr(cfg, key))(values[key]))
    return cfg


def _common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--verbose", action="store_true",
                        help="echo the effective config to stderr")
    parser.add_argument("--json", action="store_true", dest="as_json",
                        help="machine-readable output where applicable")
    parser.add_argument("--workers", type=int, help="worker pool size")
    parser.add_argument("--seed", type=int, help="rng seed for synthetic data")
    grp = parser.add_argument_group("method constants (override config file)")
    for key, typ in (("c0", float), ("i", float), ("mu", float), ("alpha", float),
                     ("beta", float), ("delta", float), ("epsilon", float),
                     ("dt", float), ("band_radius", float), ("max_iters", int),
                     ("stall_window", int), ("osc_window", int)):
        grp.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ)
    grp.add_argument("--window", type=int, help="ROI window size around a click")
    grp.add_argument("--centroid-dist", dest="centroid_dist", type=float)
    for switch in ("disable_ed", "disable_signed_coeff", "vanilla_init"):
        grp.add_argument(f"--{switch.replace('_', '-')}", dest=switch,
                         action="store_const", const=True)


def cmd_annotate(args) -> int:
    cfg = build_config(args)
    _maybe_echo(cfg, args)
    try:
        clicks = load_clicks(args.clicks)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = batch_annotate(clicks, args.images, args.out, cfg.params,
                            window=cfg.window, workers=cfg.workers,
                            variant=cfg.variant())
    payload = report.to_json()
    if args.as_json:
        print(json.dumps(payload, indent=2))
    else:
        for entry in payload["entries"]:
            status = entry["status"]
            extra = (f"iters={entry['iterations']} converged={entry['converged']}"
                     if status == "ok" else entry.get("error", ""))
            print(f"{entry['image_id']:<24} {status:<6} {extra}")
        print(f"{len(payload['entries'])} entries, "
              f"{len(report.failures)} failed, {report.elapsed_ms:.0f} ms")
    if args.report:
        Path(args.report).write_text(json.dumps(payload, indent=2) + "\n",
                                     encoding="utf-8")
    if report.failures and args.strict:
        return 1
    return 0


def cmd_evaluate(args) -> int:
    cfg = build_config(args)
    _maybe_echo(cfg, args)
    policy = MatchPolicy(centroid_dist=cfg.centroid_dist)
    try:
        report = evaluate_corpus(args.pred, args.gt, policy)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.as_json:
        print(json.dumps(report.to_json(args.fa_scale), indent=2))
    else:
        print(report.to_text(args.fa_scale))
    if args.out:
        write_report(report, args.out, args.fa_scale)
    return 0


ABLATION_ROWS = [
    ("baseline", Variant(vanilla_init=True, disable_signed_coeff=True, disable_ed=True)),
    ("+initialization", Variant(disable_signed_coeff=True, disable_ed=True)),
    ("+signed coefficient", Variant(disable_ed=True)),
    ("+contrast term", Variant()),
]


def cmd_ablation(args) -> int:
    """Mean IoU of the variant ladder over a corpus (images/, gt/, clicks.csv)."""
    cfg = build_config(args)
    _maybe_echo(cfg, args)
    corpus = Path(args.corpus)
    clicks_path = corpus / "clicks.csv"
    if not clicks_path.exists():
        print(f"error: {clicks_path} not found", file=sys.stderr)
        return 1
    try:
        clicks = load_clicks(clicks_path)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    from .metrics import iou as iou_fn
    import numpy as np
    from .image import BinaryMask

    groups: dict[str, list] = {}
    for c in clicks:
        groups.setdefault(c.image_id, []).append(c)

    rows = []
    for name, variant in ABLATION_ROWS:
        total = 0.0
        count = 0
        for image_id in sorted(groups):
            try:
                image = load_image(corpus / "images" / f"{image_id}.png")
                gt = load_mask(corpus / "gt" / f"{image_id}.png")
            except ImageLoadError as exc:
                print(f"warning: {exc}", file=sys.stderr)
                continue
            union = np.zeros((image.height, image.width), dtype=bool)
            for click in groups[image_id]:
                try:
                    res = run_annotation(image, click, cfg.params, cfg.window, variant)
                    union |= res.mask.data
                except (NoSeedPixels, AllSeedPixels, ValueError):
                    pass  # a failed variant contributes an empty mask
            total += iou_fn(BinaryMask(union), gt)
            count += 1
        rows.append((name, total / count if count else 0.0))

    if args.as_json:
        print(json.dumps({"rows": [{"variant": n, "mean_iou": v} for n, v in rows]},
                         indent=2))
    else:
        print(f"{'variant':<22} {'mean IoU':>9}")
        for name, value in rows:
            print(f"{name:<22} {value:>9.4f}")
    return 0


def cmd_synth(args) -> int:
    cfg = build_config(args)
    _maybe_echo(cfg, args)
    base = synth_mod.default_corpus_spec()
    try:
        base = synth_mod.PhantomSpec(
            size=(args.size, args.size),
            targets=[synth_mod.TargetSpec(center=(args.size // 2, args.size // 2),
                                          radius=args.radius, peak=args.peak,
                                          profile=args.profile)],
            background=args.background,
            clutter_amplitude=args.clutter,
            noise_sigma=args.noise_sigma,
        )
        synth_mod.generate_corpus(args.n, base, cfg.seed, args.out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.n} scenes under {args.out}")
    return 0


def cmd_serve(args) -> int:
    cfg = build_config(args)
    _maybe_echo(cfg, args)
    from . import service
    static_dir = args.static
    if static_dir is None:
        bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        static_dir = bundled if bundled.is_dir() else None
    try:
        service.serve_forever(args.images, args.session, cfg.params,
                              window=cfg.window, port=args.port,
                              static_dir=static_dir)
    except OSError as exc:
        print(f"error: cannot start service: {exc}", file=sys.stderr)
        return 1
    except ImageLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _maybe_echo(cfg: Config, args):
    if args.verbose:
        print(json.dumps(cfg.to_json(), indent=2), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clickmask",
        description="Click-driven level-set pseudo-mask annotation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="batch-annotate a click file")
    p.add_argument("clicks", help="click file (CSV with image_id,x,y or JSON array)")
    p.add_argument("images", help="directory of source images")
    p.add_argument("out", help="output directory for mask PNGs")
    p.add_argument("--strict", action="store_true",
                   help="nonzero exit if any entry failed")
    p.add_argument("--report", help="write the JSON batch report here")
    _common_flags(p)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("evaluate", help="score predicted masks against ground truth")
    p.add_argument("pred", help="directory of predicted masks")
    p.add_argument("gt", help="directory of ground-truth masks")
    p.add_argument("--fa-scale", type=float, default=1e6,
                   help="reporting unit for the false-alarm rate")
    p.add_argument("--out", help="write the JSON report here")
    _common_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablation", help="variant ladder mean-IoU table over a corpus")
    p.add_argument("corpus", help="corpus directory (images/, gt/, clicks.csv)")
    _common_flags(p)
    p.set_defaults(func=cmd_ablation)

    p = sub.add_parser("synth", help="generate a synthetic scene corpus")
    p.add_argument("--n", type=int, default=48)
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--radius", type=float, default=4.0)
    p.add_argument("--peak", type=float, default=0.8)
    p.add_argument("--profile", choices=["disk", "gaussian"], default="disk")
    p.add_argument("--background", type=float, default=0.18)
    p.add_argument("--clutter", type=float, default=0.03)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=0.05)
    _common_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the interactive annotation service")
    p.add_argument("images", help="directory of images to annotate")
    p.add_argument("--session", required=True, help="session directory (persisted)")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--static", help="directory with the web UI bundle")
    _common_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except KeyboardInterrupt:
        return 1


if __name__ == "__main__":
    sys.exit(main())
