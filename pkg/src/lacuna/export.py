"""Point and picture exports of a built tree.

Two point formats: 'points' keeps exact rationals (round-trippable, oracle
food), 'csv' renders decimals at a chosen precision for spreadsheets and
plotting.  SVG shows the per-level cube outlines for d <= 2.  All decimal
rendering goes through integer arithmetic so exports are byte-reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .engine import ConstructionState
from .errors import FormatError, UnsupportedDimension
from .qmath import decimal_string, format_rational, parse_rational

POINTS_HEADER = "# lacuna-points/1 d="


def write_points_exact(state: ConstructionState, path: str | Path) -> None:
    """Deepest-level cube centers as exact 'p/q' coordinates."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{POINTS_HEADER}{state.d}\n")
        for center in state.leaf_centers():
            fh.write(" ".join(format_rational(c) for c in center))
            fh.write("\n")


def read_points(path: str | Path) -> tuple[int, list[tuple[Fraction, ...]]]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith(POINTS_HEADER):
            raise FormatError("missing lacuna-points header")
        d = int(header[len(POINTS_HEADER):])
        points = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            coords = tuple(parse_rational(tok) for tok in line.split())
            if len(coords) != d:
                raise FormatError(f"point {line!r} does not have {d} coordinates")
            points.append(coords)
    return d, points


def write_points_csv(
    state: ConstructionState, path: str | Path, decimals: int = 12
) -> None:
    """Deepest-level cube centers as decimals (convenience, not certified)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f"x{v}" for v in range(state.d)) + "\n")
        for center in state.leaf_centers():
            fh.write(",".join(decimal_string(c, decimals) for c in center))
            fh.write("\n")


def _svg_coord(x: Fraction, scale: int) -> str:
    return decimal_string((x - 1) * scale, 2)


def write_svg(state: ConstructionState, path: str | Path, size: int = 720) -> None:
    """Cube outlines, one group per level; requires d <= 2.

    d=1 stacks the levels as horizontal bands, d=2 overlays the outlines on
    the unit square [1,2]^2.
    """
    if state.d > 2:
        raise UnsupportedDimension("SVG export exists for d <= 2 only")
    rows = state.depth + 1
    band = 24
    height = rows * band if state.d == 1 else size
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{size}" height="{height}" viewBox="0 0 {size} {height}">'
    ]
    for k, level in enumerate(state.levels):
        side = state.side(k)
        lines.append(f'<g id="level-{k}" fill="none" stroke="#1f3a5f" stroke-width="0.6">')
        for lower in level.lowers:
            x = _svg_coord(lower[0], size)
            w = decimal_string(side * size, 2)
            if state.d == 1:
                y = str(k * band + 4)
                lines.append(f'<rect x="{x}" y="{y}" width="{w}" height="{band - 8}"/>')
            else:
                # SVG y grows downward; flip the second axis.
                y = _svg_coord(Fraction(2) - (lower[1] + side), size)
                lines.append(f'<rect x="{x}" y="{y}" width="{w}" height="{w}"/>')
        lines.append("</g>")
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
