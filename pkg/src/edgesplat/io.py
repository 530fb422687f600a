"""Point-cloud and image files.

Clouds: whitespace-delimited ``x y z`` text (extra columns ignored) or ASCII
PLY with a ``vertex`` element. Images: 8-bit binary PGM, plus plain-text
float grids for exact export.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .camera import as_cloud
from .errors import CloudParseError, EmptyCloudError

PGM_MAGIC = b"P5"


def read_cloud(path):
    path = Path(path)
    with path.open("r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].strip() == "ply":
        points = _parse_ply(path, lines)
    else:
        points = _parse_xyz(path, lines)
    if not points:
        raise EmptyCloudError(f"{path}: no points")
    return np.array(points, dtype=np.float64)


def _parse_floats(path, lineno, tokens):
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        bad = next(t for t in tokens if not _is_float(t))
        raise CloudParseError(path, lineno, f"non-numeric token {bad!r}") from None
    if not all(np.isfinite(values)):
        raise CloudParseError(path, lineno, "non-finite coordinate")
    return values


def _is_float(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def _parse_xyz(path, lines):
    points = []
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        tokens = text.split()
        if len(tokens) < 3:
            raise CloudParseError(path, lineno, f"expected 3 coordinates, got {len(tokens)}")
        points.append(_parse_floats(path, lineno, tokens[:3]))
    return points


def _parse_ply(path, lines):
    elements = []  # [name, count, [property names]]
    fmt = None
    body = None
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if not tokens or tokens[0] in ("comment", "obj_info"):
            continue
        key = tokens[0]
        if key == "format":
            fmt = tokens[1] if len(tokens) > 1 else ""
        elif key == "element":
            if len(tokens) != 3 or not tokens[2].isdigit():
                raise CloudParseError(path, lineno, "malformed element line")
            elements.append([tokens[1], int(tokens[2]), []])
        elif key == "property":
            if not elements:
                raise CloudParseError(path, lineno, "property before any element")
            elements[-1][2].append(tokens[-1])
        elif key == "end_header":
            body = lineno
            break
        else:
            raise CloudParseError(path, lineno, f"unknown header keyword {key!r}")
    if body is None:
        raise CloudParseError(path, len(lines), "missing end_header")
    if fmt != "ascii":
        raise CloudParseError(path, 2, f"only ASCII PLY is supported, got format {fmt!r}")

    lineno = body
    for name, count, props in elements:
        if name != "vertex":
            lineno += count
            continue
        try:
            cols = [props.index(axis) for axis in ("x", "y", "z")]
        except ValueError:
            raise CloudParseError(path, body, "vertex element lacks x/y/z properties") from None
        points = []
        for _ in range(count):
            lineno += 1
            if lineno > len(lines):
                raise CloudParseError(path, lineno, "file ends inside vertex data")
            tokens = lines[lineno - 1].split()
            if len(tokens) < len(props):
                raise CloudParseError(path, lineno, f"expected {len(props)} values, got {len(tokens)}")
            points.append(_parse_floats(path, lineno, [tokens[c] for c in cols]))
        return points
    raise CloudParseError(path, body, "no vertex element")


def write_cloud(cloud, path):
    """Write ``x y z`` text (or ASCII PLY for a ``.ply`` suffix) at full precision."""
    cloud = as_cloud(cloud)
    path = Path(path)
    rows = "".join(f"{x!r} {y!r} {z!r}\n" for x, y, z in cloud.tolist())
    if path.suffix.lower() == ".ply":
        header = (
            "ply\nformat ascii 1.0\n"
            f"element vertex {len(cloud)}\n"
            "property double x\nproperty double y\nproperty double z\nend_header\n"
        )
        rows = header + rows
    path.write_text(rows, encoding="ascii")


def to_bytes(grid, normalize=False):
    """Quantize a float grid to uint8.

    With ``normalize`` the range ``[min, max]`` maps linearly onto ``[0, 255]``
    (a constant grid becomes black); otherwise values are clamped.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if normalize:
        lo, hi = float(grid.min()), float(grid.max())
        if hi > lo:
            grid = (grid - lo) * (255.0 / (hi - lo))
        else:
            grid = np.zeros_like(grid)
    return np.rint(np.clip(grid, 0.0, 255.0)).astype(np.uint8)


def write_image(grid, path, normalize=False):
    data = to_bytes(grid, normalize)
    h, w = data.shape
    with Path(path).open("wb") as fh:
        fh.write(PGM_MAGIC + f"\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_image(path):
    """Read a binary (P5) or plain (P2) PGM and scale it to ``[0, 1]``."""
    raw = Path(path).read_bytes()
    tokens = []
    pos = 0
    # magic, width, height, maxval; '#' comments allowed between them
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(raw[start:pos].decode("ascii"))
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic == "P5":
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        data = np.frombuffer(raw, dtype=dtype, count=w * h, offset=pos + 1)
    elif magic == "P2":
        data = np.array(raw[pos:].split()[: w * h], dtype=np.float64)
    else:
        raise ValueError(f"{path}: unsupported image format {magic!r}")
    if data.size != w * h:
        raise ValueError(f"{path}: expected {w * h} pixels, found {data.size}")
    return data.reshape(h, w).astype(np.float64) / maxval


def write_grid_text(grid, path):
    np.savetxt(path, np.asarray(grid, dtype=np.float64), fmt="%.17g")


def read_grid_text(path):
    return np.atleast_2d(np.loadtxt(path, dtype=np.float64))
