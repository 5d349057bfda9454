"""Linear patterns and their normal form.

A pattern is a nonzero linear form psi on m points of R^d (m*d rational
coefficients, block row = point, column = coordinate).  A set "contains" the
pattern if psi vanishes on some tuple of distinct points of the set; the
engine builds sets on which that never happens for scheduled tuples.

Normalization mirrors what the avoidance construction needs: permute the
blocks and rescale so that one coefficient is exactly 1 (the pivot), and
record

* peak: max of |psi| over the centered unit box [-1/2,1/2]^(m*d), which
  equals half the L1 norm of the coefficients,
* scales: per-entry reciprocals 1/|b| (1 at zero entries), so that
  scale*coeff is the sign of the coefficient,
* the block maps phi: z -> (scales * z), plus a 1/2 offset at the pivot
  coordinate of the last block.

With those in hand, psi evaluated on lattice images phi(z) always lands in
Z + 1/2, hence has absolute value >= 1/2 -- the inequality every gap
certificate rests on.  key_inequality_check verifies it exhaustively on a
finite window in exact arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DimensionMismatch, FormatError, ZeroPattern
from .qmath import format_rational, parse_rational

Coeffs = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class LinearPattern:
    """m x d rational coefficient matrix of a linear form on m points of R^d."""

    d: int
    m: int
    coeffs: Coeffs

    def __post_init__(self):
        if self.d < 1:
            raise DimensionMismatch("ambient dimension must be >= 1")
        if self.m < 2:
            raise DimensionMismatch("patterns need arity m >= 2")
        if len(self.coeffs) != self.m or any(len(row) != self.d for row in self.coeffs):
            raise DimensionMismatch("coefficient matrix must be m blocks of d entries")

    def is_zero(self) -> bool:
        return all(b == 0 for row in self.coeffs for b in row)


def make_pattern(d: int, rows: Sequence[Sequence[Fraction | int | str]]) -> LinearPattern:
    coeffs = tuple(tuple(Fraction(b) for b in row) for row in rows)
    return LinearPattern(d=d, m=len(coeffs), coeffs=coeffs)


@dataclass(frozen=True)
class NormalizedPattern:
    """Normal form of a LinearPattern plus the constants the engine uses.

    base.coeffs[i] == original.coeffs[perm[i]] / divisor and the zero set is
    preserved:  psi_base(x[perm[0]], ..., x[perm[m-1]]) == scale * psi(x)
    with scale = 1/divisor.
    """

    base: LinearPattern
    perm: tuple[int, ...]
    scale: Fraction
    pivot: int
    peak: Fraction
    scales: Coeffs
    max_scale: Fraction

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def m(self) -> int:
        return self.base.m

    def phi(self, block: int, z: Sequence[int | Fraction]) -> tuple[Fraction, ...]:
        """Lattice map of one block: coordinatewise scaling, and the last
        block is additionally shifted by 1/2 along the pivot axis."""
        if len(z) != self.d:
            raise DimensionMismatch("lattice vector has wrong length")
        row = self.scales[block]
        out = [row[v] * Fraction(z[v]) for v in range(self.d)]
        if block == self.m - 1:
            out[self.pivot] += Fraction(1, 2)
        return tuple(out)


def normalize(p: LinearPattern) -> NormalizedPattern:
    """Pick the pivot, swap its block last, rescale, and compute constants.

    The pivot is the nonzero coefficient of smallest magnitude (ties broken
    by smallest block then coordinate); minimizing the pivot keeps peak and
    the lattice scales small, which keeps beta and the schedule shallow.
    """
    if p.is_zero():
        raise ZeroPattern("all pattern coefficients vanish")
    best = None
    for ell in range(p.m):
        for v in range(p.d):
            b = p.coeffs[ell][v]
            if b != 0 and (best is None or abs(b) < abs(p.coeffs[best[0]][best[1]])):
                best = (ell, v)
    ell_star, pivot = best
    perm = list(range(p.m))
    perm[ell_star], perm[p.m - 1] = perm[p.m - 1], perm[ell_star]
    divisor = p.coeffs[ell_star][pivot]
    rows = tuple(
        tuple(p.coeffs[perm[i]][v] / divisor for v in range(p.d)) for i in range(p.m)
    )
    base = LinearPattern(d=p.d, m=p.m, coeffs=rows)
    peak = sum(abs(b) for row in rows for b in row) / 2
    scales = tuple(
        tuple(1 / abs(b) if b != 0 else Fraction(1) for b in row) for row in rows
    )
    return NormalizedPattern(
        base=base,
        perm=tuple(perm),
        scale=1 / divisor,
        pivot=pivot,
        peak=peak,
        scales=scales,
        max_scale=max(s for row in scales for s in row),
    )


def eval_pattern(
    p: LinearPattern | NormalizedPattern, points: Sequence[Sequence[Fraction]]
) -> Fraction:
    """Exact value of psi at an m-tuple of d-vectors."""
    coeffs = p.coeffs if isinstance(p, LinearPattern) else p.base.coeffs
    if len(points) != len(coeffs) or any(len(x) != len(coeffs[0]) for x in points):
        raise DimensionMismatch(
            f"expected {len(coeffs)} points of length {len(coeffs[0])}"
        )
    total = Fraction(0)
    for row, x in zip(coeffs, points):
        for b, xv in zip(row, x):
            if b:
                total += b * xv
    return total


def lattice_value(np_: NormalizedPattern, zs: Sequence[Sequence[int]]) -> Fraction:
    """psi evaluated on the lattice images phi(z_1), ..., phi(z_m)."""
    return eval_pattern(np_, [np_.phi(block, z) for block, z in enumerate(zs)])


def key_inequality_check(np_: NormalizedPattern, window: int) -> bool:
    """Exhaustively certify |psi(phi(z_1),...,phi(z_m))| >= 1/2 on a window.

    Runs over every integer tuple with all coordinates in [-window, window],
    in exact arithmetic, and also asserts the stronger structural fact that
    each value lies in Z + 1/2.
    """
    half = Fraction(1, 2)
    n = np_.m * np_.d
    rng = range(-window, window + 1)
    for flat in product(rng, repeat=n):
        zs = [flat[i * np_.d : (i + 1) * np_.d] for i in range(np_.m)]
        val = lattice_value(np_, zs)
        if (val - half).denominator != 1:
            raise ZeroPattern(
                f"lattice value {val} not in Z + 1/2; normalization is broken"
            )
        if abs(val) < half:
            return False
    return True


# -- pattern file I/O ------------------------------------------------------

def patterns_to_doc(d: int, patterns: Iterable[LinearPattern]) -> dict:
    return {
        "d": d,
        "patterns": [
            {
                "m": p.m,
                "coeffs": [[format_rational(b) for b in row] for row in p.coeffs],
            }
            for p in patterns
        ],
    }


def patterns_from_doc(doc: dict) -> tuple[int, list[LinearPattern]]:
    try:
        d = int(doc["d"])
        out = []
        for entry in doc["patterns"]:
            rows = [[parse_rational(b) for b in row] for row in entry["coeffs"]]
            if len(rows) != int(entry["m"]):
                raise FormatError("pattern arity does not match coefficient rows")
            out.append(make_pattern(d, rows))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed pattern file: {exc}") from exc
    if not out:
        raise FormatError("pattern file lists no patterns")
    return d, out


def load_patterns(path: str | Path) -> tuple[int, list[LinearPattern]]:
    with open(path, "r", encoding="utf-8") as fh:
        return patterns_from_doc(json.load(fh))


def save_patterns(path: str | Path, d: int, patterns: Iterable[LinearPattern]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(patterns_to_doc(d, patterns), fh, indent=1)
        fh.write("\n")
