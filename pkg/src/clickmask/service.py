"""Session-oriented HTTP API for interactive annotation.

Serves the image catalog, turns posted clicks into masks, records explicit
accept/clear decisions, and exports the accepted set as a zip.  The session is
a plain directory (mask PNGs plus a JSON manifest) so it survives restarts and
can be inspected by hand.
"""

from __future__ import annotations

import base64
import io
import json
import os
import threading
import zipfile
from dataclasses import asdict, dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np
from PIL import Image

from .annotate import Click, annotate
from .image import BinaryMask, GrayImage, ImageLoadError, load_image, load_mask, save_mask
from .levelset import AllSeedPixels, EvolutionParams, NoSeedPixels

_PARAM_FIELDS = ("c0", "i", "mu", "alpha", "beta", "delta", "epsilon", "dt",
                 "band_radius", "max_iters", "stall_window", "osc_window")


def rle_encode(bits: np.ndarray) -> list[list[list[int]]]:
    """Row-major run-length encoding: per row, a list of [start, length] runs."""
    rows = []
    for row in np.asarray(bits, dtype=bool):
        runs = []
        padded = np.diff(np.concatenate(([0], row.view(np.int8), [0])))
        starts = np.flatnonzero(padded == 1)
        ends = np.flatnonzero(padded == -1)
        for s, e in zip(starts, ends):
            runs.append([int(s), int(e - s)])
        rows.append(runs)
    return rows


def rle_decode(rows: list, width: int, height: int) -> np.ndarray:
    if len(rows) != height:
        raise ValueError(f"run-length mask has {len(rows)} rows, image has {height}")
    bits = np.zeros((height, width), dtype=bool)
    for r, runs in enumerate(rows):
        for start, length in runs:
            if start < 0 or length < 0 or start + length > width:
                raise ValueError(f"run [{start}, {length}] exceeds row width {width}")
            bits[r, start:start + length] = True
    return bits


def mask_to_png_bytes(mask: BinaryMask) -> bytes:
    buf = io.BytesIO()
    arr = np.where(mask.data, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def png_bytes_to_mask(data: bytes) -> BinaryMask:
    with Image.open(io.BytesIO(data)) as im:
        arr = np.asarray(im.convert("L"))
    return BinaryMask(arr > 127)


@dataclass
class CatalogEntry:
    image_id: str
    width: int
    height: int
    annotated: bool = False


class ApiError(Exception):
    def __init__(self, status: int, message: str, extra: dict | None = None):
        super().__init__(message)
        self.status = status
        self.payload = {"error": message}
        if extra:
            self.payload.update(extra)


@dataclass
class Session:
    """Image catalog plus accepted masks, persisted under session_dir."""

    images_dir: Path
    session_dir: Path
    params: EvolutionParams = field(default_factory=EvolutionParams)
    window: int = 128
    revision: int = 0

    def __post_init__(self):
        self.images_dir = Path(self.images_dir)
        self.session_dir = Path(self.session_dir)
        self._lock = threading.Lock()
        self._images: dict[str, GrayImage] = {}
        self._catalog: dict[str, CatalogEntry] = {}
        self._accepted: dict[str, BinaryMask] = {}
        self._load_catalog()
        self._load_session()

    def _load_catalog(self):
        if not self.images_dir.is_dir():
            raise ImageLoadError(f"images directory {self.images_dir} is not readable")
        for path in sorted(self.images_dir.glob("*.png")) + sorted(self.images_dir.glob("*.pgm")):
            image_id = path.stem
            if image_id in self._catalog:
                continue
            img = load_image(path)
            self._images[image_id] = img
            self._catalog[image_id] = CatalogEntry(image_id=image_id,
                                                   width=img.width, height=img.height)

    def _load_session(self):
        (self.session_dir / "masks").mkdir(parents=True, exist_ok=True)
        manifest = self.session_dir / "manifest.json"
        if manifest.exists():
            data = json.loads(manifest.read_text(encoding="utf-8"))
            self.revision = int(data.get("revision", 0))
            for image_id in data.get("accepted", []):
                path = self.session_dir / "masks" / f"{image_id}.png"
                if image_id in self._catalog and path.exists():
                    self._accepted[image_id] = load_mask(path)
                    self._catalog[image_id].annotated = True

    def _persist(self):
        manifest = {
            "revision": self.revision,
            "accepted": sorted(self._accepted),
            "params": {k: getattr(self.params, k) for k in _PARAM_FIELDS},
            "window": self.window,
        }
        tmp = self.session_dir / "manifest.json.tmp"
        tmp.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        os.replace(tmp, self.session_dir / "manifest.json")

    # -- reads ------------------------------------------------------------

    def catalog(self) -> list[dict]:
        return [asdict(self._catalog[image_id]) for image_id in sorted(self._catalog)]

    def image_bytes(self, image_id: str) -> bytes:
        for ext in (".png", ".pgm"):
            path = self.images_dir / f"{image_id}{ext}"
            if path.exists():
                return path.read_bytes()
        raise ApiError(404, f"unknown image {image_id!r}")

    def mask_bytes(self, image_id: str) -> bytes:
        if image_id not in self._catalog:
            raise ApiError(404, f"unknown image {image_id!r}")
        with self._lock:
            mask = self._accepted.get(image_id)
        if mask is None:
            raise ApiError(404, f"no accepted mask for {image_id!r}")
        return mask_to_png_bytes(mask)

    # -- annotate (pure w.r.t. the session) --------------------------------

    def run_annotation(self, body: dict) -> dict:
        image_id = body.get("image_id")
        if image_id not in self._catalog:
            raise ApiError(404, f"unknown image {image_id!r}")
        image = self._images[image_id]
        try:
            x = int(body["x"])
            y = int(body["y"])
        except (KeyError, TypeError, ValueError):
            raise ApiError(422, "click requires integer x and y")
        if not (0 <= x < image.width and 0 <= y < image.height):
            raise ApiError(422, f"click ({x}, {y}) outside image bounds")

        params = self.params
        overrides = body.get("params") or {}
        if overrides:
            unknown = set(overrides) - set(_PARAM_FIELDS)
            if unknown:
                raise ApiError(422, f"unknown parameter override {sorted(unknown)}")
            merged = {k: getattr(self.params, k) for k in _PARAM_FIELDS}
            merged.update(overrides)
            try:
                params = EvolutionParams(**merged)
            except (TypeError, ValueError) as exc:
                raise ApiError(422, str(exc))

        click = Click(image_id=image_id, x=x, y=y)
        try:
            result = annotate(image, click, params, self.window)
        except NoSeedPixels as exc:
            raise ApiError(409, str(exc), {"roi": exc.roi.as_dict() if exc.roi else None})
        except AllSeedPixels as exc:
            raise ApiError(409, str(exc), {"roi": exc.roi.as_dict() if exc.roi else None})

        self._log_click(image_id, x, y)
        return {
            "mask": {
                "width": image.width,
                "height": image.height,
                "rle": rle_encode(result.mask.data),
                "png_base64": base64.b64encode(mask_to_png_bytes(result.mask)).decode("ascii"),
            },
            "iterations": result.iterations,
            "converged": result.converged,
            "oscillating": result.oscillating,
            "c1": result.c1,
            "c2": result.c2,
            "roi": result.roi.as_dict(),
        }

    def _log_click(self, image_id: str, x: int, y: int):
        line = json.dumps({"image_id": image_id, "x": x, "y": y}) + "\n"
        with self._lock:
            with open(self.session_dir / "clicks.jsonl", "a", encoding="utf-8") as fh:
                fh.write(line)

    # -- mutations ----------------------------------------------------------

    def accept(self, image_id: str, body: dict) -> int:
        if image_id not in self._catalog:
            raise ApiError(404, f"unknown image {image_id!r}")
        entry = self._catalog[image_id]
        mask_body = body.get("mask") or {}
        try:
            if "rle" in mask_body:
                width = int(mask_body.get("width", entry.width))
                height = int(mask_body.get("height", entry.height))
                bits = rle_decode(mask_body["rle"], width, height)
                mask = BinaryMask(bits)
            elif "png_base64" in mask_body:
                mask = png_bytes_to_mask(base64.b64decode(mask_body["png_base64"]))
            else:
                raise ValueError("mask body requires rle or png_base64")
        except (ValueError, TypeError, KeyError) as exc:
            raise ApiError(422, f"invalid mask body: {exc}")
        if (mask.height, mask.width) != (entry.height, entry.width):
            raise ApiError(422, f"mask {mask.width}x{mask.height} does not match "
                                f"image {entry.width}x{entry.height}")
        with self._lock:
            save_mask(mask, self.session_dir / "masks" / f"{image_id}.png")
            self._accepted[image_id] = mask
            entry.annotated = True
            self.revision += 1
            self._persist()
            return self.revision

    def clear(self, image_id: str) -> int:
        if image_id not in self._catalog:
            raise ApiError(404, f"unknown image {image_id!r}")
        with self._lock:
            self._accepted.pop(image_id, None)
            path = self.session_dir / "masks" / f"{image_id}.png"
            if path.exists():
                path.unlink()
            self._catalog[image_id].annotated = False
            self.revision += 1
            self._persist()
            return self.revision

    # -- export ---------------------------------------------------------------

    def export_zip(self) -> bytes:
        """Deterministic archive: accepted masks, click log, effective params."""
        with self._lock:
            accepted = {k: mask_to_png_bytes(v) for k, v in sorted(self._accepted.items())}
            clicks_path = self.session_dir / "clicks.jsonl"
            click_log = clicks_path.read_bytes() if clicks_path.exists() else b""
            params = json.dumps(
                {**{k: getattr(self.params, k) for k in _PARAM_FIELDS},
                 "window": self.window},
                indent=2, sort_keys=True).encode() + b"\n"

        buf = io.BytesIO()
        stamp = (1980, 1, 1, 0, 0, 0)  # fixed timestamps keep exports byte-identical
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
            zf.writestr(zipfile.ZipInfo("params.json", stamp), params)
            zf.writestr(zipfile.ZipInfo("clicks.jsonl", stamp), click_log)
            for image_id, png in accepted.items():
                zf.writestr(zipfile.ZipInfo(f"masks/{image_id}.png", stamp), png)
        return buf.getvalue()


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "clickmask"
    session: Session = None
    static_dir: Path | None = None

    def log_message(self, fmt, *args):  # quiet by default
        if os.environ.get("CLICKMASK_HTTP_LOG"):
            super().log_message(fmt, *args)

    def _send(self, status: int, body: bytes, content_type: str):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload: dict):
        self._send(status, json.dumps(payload).encode("utf-8"), "application/json")

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ApiError(422, f"invalid JSON body: {exc}")

    def _static(self, name: str) -> bool:
        if self.static_dir is None:
            return False
        path = (self.static_dir / name.lstrip("/")).resolve()
        if not str(path).startswith(str(self.static_dir.resolve())) or not path.is_file():
            return False
        ctype = {"html": "text/html", "js": "application/javascript",
                 "css": "text/css", "map": "application/json",
                 "png": "image/png"}.get(path.suffix.lstrip("."), "application/octet-stream")
        self._send(200, path.read_bytes(), ctype)
        return True

    def do_GET(self):
        try:
            parts = [p for p in self.path.split("?")[0].split("/") if p]
            if self.path == "/healthz":
                self._send(200, b"ok", "text/plain")
            elif not parts or parts == ["index.html"]:
                if not self._static("index.html"):
                    self._send_json(404, {"error": "no frontend bundle installed"})
            elif parts == ["images"]:
                self._send_json(200, {"images": self.session.catalog()})
            elif len(parts) == 2 and parts[0] == "images":
                self._send(200, self.session.image_bytes(parts[1]), "image/png")
            elif len(parts) == 3 and parts[0] == "images" and parts[2] == "mask":
                self._send(200, self.session.mask_bytes(parts[1]), "image/png")
            elif parts == ["export"]:
                body = self.session.export_zip()
                self.send_response(200)
                self.send_header("Content-Type", "application/zip")
                self.send_header("Content-Disposition", "attachment; filename=export.zip")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
            elif self._static(self.path):
                pass
            else:
                self._send_json(404, {"error": f"no such resource {self.path}"})
        except ApiError as exc:
            self._send_json(exc.status, exc.payload)

    def do_POST(self):
        try:
            parts = [p for p in self.path.split("?")[0].split("/") if p]
            body = self._read_json()
            if parts == ["annotate"]:
                self._send_json(200, self.session.run_annotation(body))
            elif len(parts) == 3 and parts[0] == "images" and parts[2] == "accept":
                self._send_json(200, {"revision": self.session.accept(parts[1], body)})
            elif len(parts) == 3 and parts[0] == "images" and parts[2] == "clear":
                self._send_json(200, {"revision": self.session.clear(parts[1])})
            else:
                self._send_json(404, {"error": f"no such resource {self.path}"})
        except ApiError as exc:
            self._send_json(exc.status, exc.payload)


def make_server(images_dir, session_dir, params: EvolutionParams | None = None,
                window: int = 128, port: int = 0,
                static_dir=None) -> tuple[ThreadingHTTPServer, Session]:
    """Bind the service; port 0 picks a free port (see server.server_address)."""
    session = Session(images_dir=images_dir, session_dir=session_dir,
                      params=params if params is not None else EvolutionParams(),
                      window=window)
    handler = type("BoundHandler", (_Handler,), {
        "session": session,
        "static_dir": Path(static_dir) if static_dir else None,
    })
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    return server, session


def serve_forever(images_dir, session_dir, params=None, window=128, port=8080,
                  static_dir=None):
    server, _session = make_server(images_dir, session_dir, params, window, port,
                                   static_dir)
    host, bound_port = server.server_address
    print(f"serving on http://{host}:{bound_port} "
          f"(images: {images_dir}, session: {session_dir})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        print("shutting down; session persisted")
    finally:
        server.server_close()
