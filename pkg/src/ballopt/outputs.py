"""Result persistence: CSV, JSON and SVG emission with embedded metadata.

Every file carries a metadata block (config hash, code version, solver
tolерances) so runs are attributable; floats go out at 17 significant digits,
which round-trips float64 exactly.  Outputs are byte-deterministic for a
fixed config and version; only SVG may carry a timestamp, and that is
suppressed unless explicitly requested.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from datetime import datetime, timezone

from . import __version__

TOLERANCES = {
    "eigen_residual": 1e-8,
    "inner_solve": 1e-10,
    "matching_ftol": 1e-12,
    "quadrature_abs": 1e-10,
}


def fmt_float(x: float) -> str:
    return f"{x:.17g}"


def metadata_block(config_hash: str, timestamp: bool = False) -> dict:
    meta = {
        "code_version": __version__,
        "config_sha256": config_hash,
        "tolerances": TOLERANCES,
    }
    if timestamp:
        meta["generated_at"] = datetime.now(timezone.utc).isoformat()
    return meta


def check_writable(path: str):
    """Fail before any computation if the output directory cannot be written."""
    os.makedirs(path, exist_ok=True)
    probe = os.path.join(path, ".write_probe")
    try:
        with open(probe, "w") as fh:
            fh.write("ok")
        os.remove(probe)
    except OSError as exc:
        raise RuntimeError(f"output directory {path!r} is not writable: {exc}") from exc


def write_csv(path: str, rows: list[dict], config_hash: str) -> None:
    """RFC-4180 CSV preceded by '# key: value' metadata comment lines."""
    if not rows:
        raise ValueError("no rows to write")
    meta = metadata_block(config_hash)
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")
    fieldnames = list(rows[0].keys())
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n",
                            quoting=csv.QUOTE_MINIMAL)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: fmt_float(v) if isinstance(v, float) else v
                         for k, v in row.items()})
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path: str) -> tuple[list[dict], dict]:
    """Round-trip reader for files produced by write_csv."""
    meta: dict = {}
    lines = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, raw = line[2:].partition(": ")
                meta[key.strip()] = json.loads(raw)
            else:
                lines.append(line)
    rows = []
    for row in csv.DictReader(lines):
        parsed = {}
        for k, v in row.items():
            try:
                parsed[k] = float(v)
            except (TypeError, ValueError):
                parsed[k] = v
        rows.append(parsed)
    return rows, meta


def write_json(path: str, payload: dict, config_hash: str) -> None:
    doc = {"_metadata": metadata_block(config_hash), **payload}
    with open(path, "w") as fh:
        json.dump(_sanitize(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sanitize(obj):
    """JSON-safe copy: NaN/inf become null, numpy scalars become floats."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


# ---------------------------------------------------------------------------
# Minimal deterministic SVG plotting
# ---------------------------------------------------------------------------

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 36, 52


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(round(t, 12))
        t += step
    return out


def svg_line_plot(path: str, series: list[tuple[list[float], list[float], str]],
                  title: str, xlabel: str, ylabel: str, *, logy: bool = False,
                  config_hash: str = "", timestamp: bool = False) -> None:
    """Polyline plot with axes and legend; byte-deterministic unless stamped."""
    pts_all = [(x, math.log10(y) if logy else y)
               for xs, ys, _ in series for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y) and (not logy or y > 0)]
    if not pts_all:
        pts_all = [(0.0, 0.0), (1.0, 1.0)]
    xs_all, ys_all = zip(*pts_all)
    xlo, xhi = min(xs_all), max(xs_all)
    ylo, yhi = min(ys_all), max(ys_all)
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    padx = 0.04 * (xhi - xlo)
    pady = 0.06 * (yhi - ylo)
    xlo, xhi, ylo, yhi = xlo - padx, xhi + padx, ylo - pady, yhi + pady

    def sx(x):
        return _ML + (x - xlo) / (xhi - xlo) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (y - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    colors = ["#1f6fb4", "#c44e52", "#55a868", "#8172b2", "#937860"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        "<metadata>",
        json.dumps(metadata_block(config_hash, timestamp), sort_keys=True),
        "</metadata>",
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W/2:.1f}" y="22" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{title}</text>',
    ]
    axis = (f'<line x1="{_ML}" y1="{_H-_MB}" x2="{_W-_MR}" y2="{_H-_MB}" stroke="black"/>'
            f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H-_MB}" stroke="black"/>')
    parts.append(axis)
    for t in _ticks(xlo, xhi):
        parts.append(f'<line x1="{sx(t):.2f}" y1="{_H-_MB}" x2="{sx(t):.2f}" '
                     f'y2="{_H-_MB+5}" stroke="black"/>'
                     f'<text x="{sx(t):.2f}" y="{_H-_MB+20}" text-anchor="middle" '
                     f'font-size="11" font-family="sans-serif">{t:g}</text>')
    for t in _ticks(ylo, yhi):
        label = f"1e{t:g}" if logy else f"{t:g}"
        parts.append(f'<line x1="{_ML-5}" y1="{sy(t):.2f}" x2="{_ML}" y2="{sy(t):.2f}" '
                     f'stroke="black"/>'
                     f'<text x="{_ML-8}" y="{sy(t)+4:.2f}" text-anchor="end" '
                     f'font-size="11" font-family="sans-serif">{label}</text>')
    parts.append(f'<text x="{(_ML+_W-_MR)/2:.1f}" y="{_H-14}" text-anchor="middle" '
                 f'font-size="12" font-family="sans-serif">{xlabel}</text>')
    parts.append(f'<text x="18" y="{(_MT+_H-_MB)/2:.1f}" text-anchor="middle" '
                 f'font-size="12" font-family="sans-serif" '
                 f'transform="rotate(-90 18 {(_MT+_H-_MB)/2:.1f})">{ylabel}</text>')
    for i, (xs, ys, label) in enumerate(series):
        col = colors[i % len(colors)]
        pts = [(sx(x), sy(math.log10(y) if logy else y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y) and (not logy or y > 0)]
        if not pts:
            continue
        d = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
        parts.append(f'<polyline points="{d}" fill="none" stroke="{col}" stroke-width="1.6"/>')
        for px, py in pts:
            parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.6" fill="{col}"/>')
        parts.append(f'<text x="{_W-_MR-6}" y="{_MT+16*(i+1)}" text-anchor="end" '
                     f'font-size="11" font-family="sans-serif" fill="{col}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def svg_center_trajectory(path: str, boundary_pts, centers, radii,
                          config_hash: str = "", timestamp: bool = False) -> None:
    """Domain outline with the per-measure optimal centers and ball outlines."""
    bx = [p[0] for p in boundary_pts]
    by = [p[1] for p in boundary_pts]
    xlo, xhi = min(bx), max(bx)
    ylo, yhi = min(by), max(by)
    span = max(xhi - xlo, yhi - ylo)
    size = 520
    pad = 40

    def sx(x):
        return pad + (x - xlo) / span * (size - 2 * pad)

    def sy(y):
        return size - pad - (y - ylo) / span * (size - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        "<metadata>",
        json.dumps(metadata_block(config_hash, timestamp), sort_keys=True),
        "</metadata>",
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    d = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in boundary_pts)
    parts.append(f'<polygon points="{d}" fill="#eef3f8" stroke="#333" stroke-width="1.2"/>')
    for (c, r) in zip(centers, radii):
        if any(not math.isfinite(v) for v in c):
            continue
        rr = r / span * (size - 2 * pad)
        parts.append(f'<circle cx="{sx(c[0]):.2f}" cy="{sy(c[1]):.2f}" r="{rr:.2f}" '
                     f'fill="none" stroke="#c44e52" stroke-width="1.0"/>')
        parts.append(f'<circle cx="{sx(c[0]):.2f}" cy="{sy(c[1]):.2f}" r="2.5" fill="#c44e52"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def shape_boundary_points(shape, n: int = 256) -> list[tuple[float, float]]:
    """Polyline approximation of a 2D shape boundary for plotting."""
    import numpy as np

    from .geometry import Disk, Ellipse, Polygon, Rectangle, ShapeUnion

    if isinstance(shape, Rectangle):
        (x0, y0), (x1, y1) = shape.lo, shape.hi
        return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    if isinstance(shape, Disk):
        t = np.linspace(0, 2 * math.pi, n, endpoint=False)
        return [(shape.center[0] + shape.radius * math.cos(a),
                 shape.center[1] + shape.radius * math.sin(a)) for a in t]
    if isinstance(shape, Ellipse):
        t = np.linspace(0, 2 * math.pi, n, endpoint=False)
        return [(shape.center[0] + shape.semi_axes[0] * math.cos(a),
                 shape.center[1] + shape.semi_axes[1] * math.sin(a)) for a in t]
    if isinstance(shape, Polygon):
        return [tuple(v) for v in shape.vertices]
    if isinstance(shape, ShapeUnion):
        # plotting proxy: dense boundary sample of the union via membership tests
        lo, hi = shape.bbox()
        t = np.linspace(0, 2 * math.pi, n, endpoint=False)
        c = 0.5 * (lo + hi)
        out = []
        for a in t:
            d = np.array([math.cos(a), math.sin(a)])
            r_lo, r_hi = 0.0, float(np.linalg.norm(hi - lo))
            for _ in range(40):
                mid = 0.5 * (r_lo + r_hi)
                if shape.contains((c + mid * d).reshape(1, -1))[0]:
                    r_lo = mid
                else:
                    r_hi = mid
            out.append(tuple(c + r_lo * d))
        return out
    raise ValueError(f"no boundary sampler for {type(shape).__name__}")
