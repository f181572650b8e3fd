"""CSV and SVG writers.

Every file starts with a ``mode`` tag (``near-field``, ``collimated`` or
``point-source``). CSV numbers use ``%.17g`` so values round-trip exactly.

SVG layout::

    <svg xmlns="http://www.w3.org/2000/svg" viewBox="x0 -y1 w h">
    <!-- mode: near-field -->
    <path class="domain" d="M x,y L ... Z" fill="none" stroke="black" .../>
    <path class="cell" data-cell="i" d="M x,y L ... Z" fill="hsl(h,60%,75%)" .../>
    ...
    </svg>

The first path is the aperture polygon; then one path per closed boundary
loop of every cell, in cell order. Coordinates have 3 decimals and ``y``
is negated so the picture is upright. The hue of cell ``i`` is
``137.508 * i mod 360``.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .geometry import phase_eval

WEIGHT_COLUMNS = ("index", "y1", "y2", "g", "b_gauge0", "b_pin1")
CONVERGENCE_COLUMNS = ("iter", "error", "tau", "ell", "min_cell_mass")
GOLDEN_ANGLE = 137.508


def _num(v) -> str:
    return "%.17g" % v


def _write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def _csv(header_lines, columns, rows) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def weights_csv(targets, g, b, mode: str = "near-field") -> str:
    """Table of targets, masses and weights in the zero-sum and first-pinned gauges."""
    b = np.asarray(b, dtype=float)
    b0 = b - b.mean()
    b1 = b - b[0]
    targets = np.asarray(targets, dtype=float)
    rows = [(i, _num(targets[i, 0]), _num(targets[i, 1]), _num(g[i]), _num(b0[i]), _num(b1[i]))
            for i in range(len(b))]
    return _csv([f"mode: {mode}"], WEIGHT_COLUMNS, rows)


def write_weights_csv(path, targets, g, b, mode: str = "near-field") -> Path:
    return _write(path, weights_csv(targets, g, b, mode))


def read_weights_csv(path) -> dict:
    """Parse a weights file into arrays ``targets``, ``g``, ``b`` plus ``mode``.

    ``b`` is taken from the ``b_gauge0`` column.

    Raises
    ------
    ConfigError
        If the file is missing or malformed.
    """
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    mode = "near-field"
    body = []
    for line in lines:
        if line.startswith("#"):
            if line[1:].strip().startswith("mode:"):
                mode = line.split(":", 1)[1].strip()
        elif line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    if not rows or tuple(rows[0]) != WEIGHT_COLUMNS:
        raise ConfigError(f"{path}: expected header {','.join(WEIGHT_COLUMNS)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 6)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if len(data) == 0:
        raise ConfigError(f"{path}: no rows")
    return {"mode": mode, "targets": data[:, 1:3], "g": data[:, 3], "b": data[:, 4]}


def convergence_csv(history, mode: str = "near-field") -> str:
    rows = [(h.iter, _num(h.error), _num(h.tau), h.ell, _num(h.min_cell_mass)) for h in history]
    return _csv([f"mode: {mode}"], CONVERGENCE_COLUMNS, rows)


def write_convergence_csv(path, history, mode: str = "near-field") -> Path:
    return _write(path, convergence_csv(history, mode))


def cell_color(i: int) -> str:
    return f"hsl({(GOLDEN_ANGLE * i) % 360:.3f},60%,75%)"


def _fix3(v) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def _path_data(loop) -> str:
    loop = np.asarray(loop, dtype=float)
    if len(loop) > 1 and np.allclose(loop[0], loop[-1]):
        loop = loop[:-1]
    return "M " + " L ".join(f"{_fix3(x)},{_fix3(-y)}" for x, y in loop) + " Z"


def svg_document(domain, cell_loops, mode: str = "near-field") -> str:
    """SVG text for a domain polygon and per-cell lists of closed loops."""
    domain = np.asarray(domain, dtype=float)
    x0, y0 = domain.min(axis=0)
    x1, y1 = domain.max(axis=0)
    w, h = x1 - x0, y1 - y0
    stroke = 2e-3 * max(w, h)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fix3(x0)} {_fix3(-y1)} {_fix3(w)} {_fix3(h)}">',
           f"<!-- mode: {mode} -->",
           f'<path class="domain" d="{_path_data(domain)}" fill="none" stroke="black" '
           f'stroke-width="{stroke:.3f}"/>']
    for i, loops in enumerate(cell_loops):
        for loop in loops:
            out.append(f'<path class="cell" data-cell="{i}" d="{_path_data(loop)}" '
                       f'fill="{cell_color(i)}" stroke="black" stroke-width="{stroke / 2:.3f}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def diagram_svg(diagram, mode: str = "near-field") -> str:
    """SVG of a :class:`~metalens.cells.LaguerreDiagram`."""
    return svg_document(diagram.scene.domain, [c.loops for c in diagram.cells], mode)


def affine_cells_svg(domain, cells, mode: str) -> str:
    """SVG of far-field polygons as returned by :func:`~metalens.farfield.affine_cells`."""
    return svg_document(domain, [[v] if len(v) else [] for v, _ in cells], mode)


def write_text(path, text: str) -> Path:
    return _write(path, text)


def phase_grid(scene, b, resolution: int = 256):
    """``phi(x) = min_i c(X, Y_i) + b_i`` on a ``resolution x resolution`` grid of the domain's box.

    Returns ``(xs, ys, values)`` with ``values[r, c]`` at ``(xs[c], ys[r])``.
    """
    x0, y0, x1, y1 = scene.bbox
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    X, Y = np.meshgrid(xs, ys)
    vals, _ = phase_eval(np.stack([X, Y], axis=-1), scene, np.asarray(b, dtype=float))
    return xs, ys, vals


def phase_csv(scene, b, resolution: int = 256, mode: str = "near-field") -> str:
    xs, ys, vals = phase_grid(scene, b, resolution)
    header = [f"mode: {mode}",
              f"phase grid nx={len(xs)} ny={len(ys)} x0={_num(xs[0])} x1={_num(xs[-1])} "
              f"y0={_num(ys[0])} y1={_num(ys[-1])} alpha={_num(scene.alpha)} beta={_num(scene.beta)}",
              "row r holds y = y0 + r (y1 - y0) / (ny - 1); column c holds x likewise"]
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    for row in vals:
        buf.write(",".join(_num(v) for v in row) + "\n")
    return buf.getvalue()


def write_phase_csv(path, scene, b, resolution: int = 256, mode: str = "near-field") -> Path:
    return _write(path, phase_csv(scene, b, resolution, mode))


def read_phase_csv(path):
    """Values matrix and metadata dict of a phase grid file."""
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            if not line[1:].strip().startswith("phase grid"):
                continue
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = float(v)
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2), meta
