"""Deterministic CSV, JSON and SVG writers."""
from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import DomainError

_COMPLEX_RE = re.compile(
    r"""^\s*(?:
        (?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
        (?:(?P<sign>[+-])(?P<im>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?[ij])?
      |
        (?P<pure>[+-]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?)[ij]
    )\s*$""",
    re.VERBOSE,
)


def parse_complex(text: str) -> complex:
    """Parse ``"re"``, ``"re+imi"``, ``"imi"`` (``j`` also accepted); locale independent."""
    m = _COMPLEX_RE.match(text)
    if m is None:
        raise DomainError(f"cannot parse complex number {text!r}; expected re+imi")
    if m.group("re") is not None:
        re_part = float(m.group("re"))
        if m.group("sign") is None:
            return complex(re_part, 0.0)
        im = float(m.group("im")) if m.group("im") else 1.0
        return complex(re_part, -im if m.group("sign") == "-" else im)
    pure = m.group("pure")
    im = 1.0 if pure in ("", "+") else -1.0 if pure == "-" else float(pure)
    return complex(0.0, im)


def parse_list(text: str, conv=float) -> list:
    return [conv(t) for t in text.split(",") if t.strip()]


def fmt(x: float, digits: int = 16) -> str:
    """Shortest stable text for a float; ``-0`` is written as ``0``."""
    x = float(x)
    if x == 0.0:
        return "0"
    return format(x, f".{digits}g")


def fmt_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 or (z.imag == 0 and math.copysign(1.0, z.imag) < 0) else "+"
    return f"{fmt(z.real)}{sign}{fmt(abs(z.imag))}i"


def complex_tag(z: complex) -> str:
    """Filesystem-friendly label such as ``0p5`` or ``0_1p618i``."""
    z = complex(z)
    tag = fmt(z.real, 6) if z.imag == 0 else fmt_complex(complex(round(z.real, 6), round(z.imag, 6)))
    return tag.replace(".", "p").replace("-", "m").replace("+", "_")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=False) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def polylines_csv(curve) -> str:
    """One block per polyline, blocks separated by a blank line; columns ``re,im``."""
    blocks = []
    for line in curve.polylines:
        rows = "\n".join(f"{fmt(z.real)},{fmt(z.imag)}" for z in line)
        blocks.append("re,im\n" + rows)
    return "\n\n".join(blocks) + "\n"


def read_polylines_csv(text: str) -> list:
    out = []
    for block in text.strip().split("\n\n"):
        rows = [r for r in block.strip().splitlines() if r and not r.startswith("re")]
        out.append(np.array([complex(*map(float, r.split(","))) for r in rows]))
    return out


def table_csv(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in r))
    return "\n".join(lines) + "\n"


# -- SVG ------------------------------------------------------------------------------------

BAND_COLOR = "#000000"
POLE_COLOR = "#d62728"
_BLUE_LIGHT = (158, 202, 225)
_BLUE_DARK = (8, 48, 107)


def _blue(t: float) -> str:
    rgb = [round(l + (d - l) * t) for l, d in zip(_BLUE_LIGHT, _BLUE_DARK)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _extent(curves, pad=0.15, cap=6.0):
    pts = [np.array([-2.0 + 0j, 2.0 + 0j])]
    for c in curves:
        v = c.vertices()
        pts.append(v[np.abs(v) < cap])
        pts.extend(np.array([z]) for _, z in c.features)
    p = np.concatenate(pts)
    x0, x1 = float(p.real.min()), float(p.real.max())
    y0, y1 = float(p.imag.min()), float(p.imag.max())
    w, h = x1 - x0, y1 - y0
    return x0 - pad * w, x1 + pad * w, y0 - pad * h - 0.1, y1 + pad * h + 0.1


def enclosure_svg(curves, title: str = "", width: int = 640) -> str:
    """Band in black, one blue group per ``Q`` (darker for larger ``Q``), pole as a red dot."""
    x0, x1, y0, y1 = _extent(curves)
    scale = width / (x1 - x0)
    height = int(math.ceil((y1 - y0) * scale))

    def X(x):
        return f"{(x - x0) * scale:.3f}"

    def Y(y):
        return f"{(y1 - y) * scale:.3f}"

    a = curves[0].a if curves else 0j
    order = sorted(range(len(curves)), key=lambda i: curves[i].Q)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" data-a="{fmt_complex(a)}" data-curves="{len(curves)}">',
           f"<title>{title}</title>" if title else "",
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>']
    for rank, i in enumerate(order):
        c = curves[i]
        t = rank / max(1, len(curves) - 1)
        out.append(f'<g class="curve" data-q="{fmt(c.Q)}" data-polylines="{c.n_polylines}" '
                   f'fill="none" stroke="{_blue(t)}" stroke-width="1.5">')
        for line, closed in zip(c.polylines, c.closed):
            d = "M" + " L".join(f"{X(z.real)} {Y(z.imag)}" for z in line)
            out.append(f'<path d="{d}{" Z" if closed else ""}"/>')
        out.append("</g>")
    out.append(f'<line class="band" x1="{X(-2.0)}" y1="{Y(0.0)}" x2="{X(2.0)}" y2="{Y(0.0)}" '
               f'stroke="{BAND_COLOR}" stroke-width="2"/>')
    feats = curves[0].features if curves else []
    for label, z in feats:
        if label == "eigenvalue":
            out.append(f'<circle class="pole" cx="{X(z.real)}" cy="{Y(z.imag)}" r="4" fill="{POLE_COLOR}"/>')
        else:
            out.append(f'<circle class="threshold" cx="{X(z.real)}" cy="{Y(z.imag)}" r="2.5" '
                       f'fill="{BAND_COLOR}"/>')
    out.append("</svg>")
    return "\n".join(s for s in out if s) + "\n"
