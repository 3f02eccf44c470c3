"""File formats: float grids, PGM/PPM images and JSON boundary documents."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .trace import BOUNDARY_IDS, BoundaryCurve

GRID_MAGIC = b"GDM1"
_HEADER = struct.Struct("<4sIII")

# One fixed colour per boundary, B1..B9.
PALETTE = (
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200), (245, 130, 48),
    (145, 30, 180), (70, 240, 240), (240, 50, 230), (210, 245, 60),
)


class FormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# GridFile
# ---------------------------------------------------------------------------

def write_grid(path, data) -> None:
    """Write a 2D or 3D float field as little-endian float32 behind a small header."""
    arr = np.asarray(data)
    if arr.ndim == 2:
        slices, (rows, cols) = 1, arr.shape
    elif arr.ndim == 3:
        slices, rows, cols = arr.shape
    else:
        raise ValueError("grid must be 2D or 3D")
    payload = np.ascontiguousarray(arr, dtype="<f4")
    if not np.all(np.isfinite(payload)):
        raise ValueError("grid contains non-finite values")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(GRID_MAGIC, rows, cols, slices))
        fh.write(payload.tobytes())


def parse_grid(buf: bytes) -> np.ndarray:
    if len(buf) < _HEADER.size:
        raise FormatError("truncated grid header")
    magic, rows, cols, slices = _HEADER.unpack_from(buf)
    if magic != GRID_MAGIC:
        raise FormatError("not a grid file")
    n = rows * cols * slices
    if n == 0:
        raise FormatError("empty grid")
    if len(buf) != _HEADER.size + 4 * n:
        raise FormatError(f"payload holds {len(buf) - _HEADER.size} bytes, header needs {4 * n}")
    arr = np.frombuffer(buf, dtype="<f4", count=n, offset=_HEADER.size).astype(np.float32)
    if not np.all(np.isfinite(arr)):
        raise FormatError("grid contains non-finite values")
    return arr.reshape(rows, cols) if slices == 1 else arr.reshape(slices, rows, cols)


def read_grid(path) -> np.ndarray:
    """Read a grid file; 2D when the header says one slice. Values are float32."""
    return parse_grid(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# PGM / PPM
# ---------------------------------------------------------------------------

def _pnm_header(buf: bytes, magic: bytes):
    if not buf.startswith(magic):
        raise FormatError(f"expected {magic.decode()} image")
    fields, pos = [], len(magic)
    while len(fields) < 3:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            while pos < len(buf) and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and buf[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise FormatError("malformed header")
        fields.append(int(buf[start:pos]))
    if pos >= len(buf) or not buf[pos:pos + 1].isspace():
        raise FormatError("malformed header")
    width, height, maxval = fields
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError("bad image dimensions or maxval")
    return width, height, maxval, pos + 1


def parse_pgm(buf: bytes) -> np.ndarray:
    """Binary PGM (8 or 16 bit) scaled to [0, 1] by its maxval."""
    width, height, maxval, offset = _pnm_header(buf, b"P5")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    n = width * height
    if len(buf) - offset < n * dtype.itemsize:
        raise FormatError("truncated payload")
    data = np.frombuffer(buf, dtype=dtype, count=n, offset=offset).reshape(height, width)
    return data.astype(np.float64) / maxval


def write_pgm(path, img, maxval: int = 255) -> None:
    img = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    if img.ndim != 2:
        raise ValueError("PGM holds one 2D image")
    dtype = ">u2" if maxval > 255 else "u1"
    data = np.rint(img * maxval).astype(dtype)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode())
        fh.write(data.tobytes())


def write_ppm(path, rgb) -> None:
    rgb = np.asarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("PPM needs a (rows, cols, 3) array")
    with open(path, "wb") as fh:
        fh.write(f"P6\n{rgb.shape[1]} {rgb.shape[0]}\n255\n".encode())
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    width, height, maxval, offset = _pnm_header(buf, b"P6")
    if maxval != 255:
        raise FormatError("only 8-bit PPM is supported")
    n = width * height * 3
    if len(buf) - offset < n:
        raise FormatError("truncated payload")
    return np.frombuffer(buf, dtype=np.uint8, count=n, offset=offset).reshape(height, width, 3)


def read_image(path) -> np.ndarray:
    """Load a PGM or grid file; 2D results are float64 in [0, 1] for PGM input."""
    buf = Path(path).read_bytes()
    if buf.startswith(GRID_MAGIC):
        return parse_grid(buf).astype(np.float64)
    if buf.startswith(b"P5"):
        return parse_pgm(buf)
    raise FormatError(f"{path}: unrecognised image format")


def write_image(path, img) -> None:
    """Write by extension: ``.pgm`` as 16-bit PGM, anything else as a grid file."""
    if str(path).lower().endswith(".pgm"):
        write_pgm(path, img, maxval=65535)
    else:
        write_grid(path, img)


# ---------------------------------------------------------------------------
# Overlays
# ---------------------------------------------------------------------------

def render_overlay(img, boundaries=None) -> np.ndarray:
    """Grey image with each boundary drawn in its palette colour at the rounded row."""
    img = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    if img.ndim != 2:
        raise ValueError("overlay needs a 2D image")
    grey = np.rint(img * 255).astype(np.uint8)
    rgb = np.repeat(grey[:, :, None], 3, axis=2)
    boundaries = {} if boundaries is None else getattr(boundaries, "boundaries", boundaries)
    rows, cols = img.shape
    for i, b in enumerate(BOUNDARY_IDS):
        if b not in boundaries:
            continue
        depth = boundaries[b].depths if isinstance(boundaries[b], BoundaryCurve) else np.asarray(boundaries[b])
        if depth.shape != (cols,):
            raise ValueError(f"{b}: width {depth.shape} does not match image width {cols}")
        r = np.clip(np.floor(depth + 0.5).astype(int), 0, rows - 1)
        rgb[r, np.arange(cols)] = PALETTE[i]
    return rgb


# ---------------------------------------------------------------------------
# Boundary documents
# ---------------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "value") and hasattr(v, "name"):  # enums
        return v.value
    if isinstance(v, np.generic):
        return v.item()
    return v


def _check_order(arrays: dict):
    present = [b for b in BOUNDARY_IDS if b in arrays]
    for upper, lower in zip(present[:-1], present[1:]):
        if np.any(arrays[upper] > arrays[lower] + 1e-9):
            raise FormatError(f"{upper} lies below {lower}")


def boundary_document(boundaries: dict, image_id: str = "", params=None) -> dict:
    arrays = {}
    for b, v in boundaries.items():
        arr = v.depths if isinstance(v, BoundaryCurve) else np.asarray(v, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{b}: non-finite depth")
        arrays[b] = arr
    shapes = {a.shape for a in arrays.values()}
    if len(shapes) != 1:
        raise ValueError("boundaries differ in shape")
    shape = shapes.pop()
    _check_order(arrays)
    doc = {"image": image_id, "width": int(shape[-1])}
    if len(shape) == 2:
        doc["slices"] = int(shape[0])
    for b in sorted(arrays, key=lambda k: (k not in BOUNDARY_IDS, k)):
        doc[b] = arrays[b].tolist()
    doc["params"] = _jsonable(params or {})
    return doc


def write_boundaries(path, boundaries: dict, image_id: str = "", params=None) -> None:
    """Write boundaries (1D per image or 2D per volume) as a JSON document."""
    doc = boundary_document(boundaries, image_id, params)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def read_boundaries(path) -> dict:
    """Read a boundary document; returns ``{id: depths}`` plus ``doc`` metadata."""
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or "width" not in doc:
        raise FormatError("not a boundary document")
    width = doc["width"]
    arrays = {}
    for key, val in doc.items():
        if key in ("image", "width", "slices", "params"):
            continue
        if not isinstance(val, list) or any(v is None for v in np.ravel(np.array(val, dtype=object))):
            raise FormatError(f"{key}: missing or null depths")
        arr = np.asarray(val, dtype=np.float64)
        if arr.shape[-1] != width:
            raise FormatError(f"{key}: {arr.shape[-1]} depths for width {width}")
        arrays[key] = arr
    _check_order(arrays)
    return arrays


def read_boundary_meta(path) -> dict:
    doc = json.loads(Path(path).read_text())
    return {k: doc.get(k) for k in ("image", "width", "slices", "params")}
