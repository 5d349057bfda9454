"""Verifiable outputs: gap certificates, measure certificate, brute oracle.

The avoidance claim at finite depth is per processed schedule entry: every
point tuple drawn from the entry's placed cubes keeps |psi| at least
peak * delta_M, because each placed center is a lattice image (value in
4*peak*delta*(Z + 1/2), so at least 2*peak*delta in magnitude) and moving
from centers to arbitrary points inside the cubes costs at most peak*delta.
certify_gap re-derives all of that from the stored geometry: it recovers the
integer lattice vector of every placed cube exactly and either minimizes
|psi| over center combinations exactly or falls back to the structural
bound.  Nothing is trusted from the build.

The measure certificate is the mass-distribution principle made concrete:
with the uniform cube mass mu(I_k) = 1/N_k, the per-level bound
1/N_k <= h(sqrt(d) * delta_k) for k0 <= k <= depth (k0 = first avoidance
level) gives H^h(E) >= 1/c3 with c3 = 2^d * (2*sqrt(d)+3)^d, conditional on
the construction continuing by the same schedule.  Directed rounding is
centralized: lower bounds of h and sqrt(d) certify ">=" goals, upper bounds
enter c3.
"""

from __future__ import annotations

import bisect
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product

from .engine import ConstructionState
from .errors import (
    EntryNotProcessed,
    GapViolated,
    MeasureViolated,
    OutOfDomain,
    Undecidable,
)
from .pattern import LinearPattern, NormalizedPattern, eval_pattern
from .qmath import format_rational, ln2_bounds, ln_bounds
from .schedule import ScheduleEntry, ratio_threshold, sqrt_d_bounds

#: Above this many center combinations the exact minimum search falls back
#: to the structural half-integer bound (still a valid certificate).
COMBO_CAP = 100_000

#: Exhaustive-oracle cost warning threshold.
ORACLE_TUPLE_WARN = 5_000_000


@dataclass(frozen=True)
class GapCertificate:
    """Certified lower bound for |psi| over the placed cubes of one entry."""

    entry_index: int
    pattern_id: int
    m_level: int
    gap: Fraction
    threshold: Fraction
    placed_counts: tuple[int, ...]
    exact_min: bool


@dataclass(frozen=True)
class LevelVerdict:
    level: int
    count: int
    side: Fraction
    mass_ok: bool
    ratio_ok: bool


@dataclass(frozen=True)
class MeasureCertificate:
    c1: int
    c2: int
    c3_upper: Fraction
    k0: int
    depth: int
    per_level: tuple[LevelVerdict, ...]
    lower_bound: Fraction
    conditional: str


def _entry_of(state: ConstructionState, entry: ScheduleEntry | int) -> ScheduleEntry:
    if isinstance(entry, int):
        for e in state.entries:
            if e.index == entry:
                return e
        raise EntryNotProcessed(f"no processed schedule entry with index {entry}")
    if entry not in state.entries:
        raise EntryNotProcessed(f"entry {entry.index} was not processed by this build")
    return entry


def placed_blocks(
    state: ConstructionState, entry: ScheduleEntry
) -> list[list[tuple[Fraction, ...]]]:
    """Lower corners of the avoidance-level cubes under each tuple member."""
    if entry.m_level > state.depth:
        raise EntryNotProcessed(
            f"entry {entry.index} schedules level {entry.m_level}, build stops at {state.depth}"
        )
    level = state.levels[entry.m_level]
    shift = state.d * (state.ndigits(entry.m_level) - state.ndigits(entry.level))
    block_of = {code: b for b, code in enumerate(entry.tuple_codes)}
    out: list[list[tuple[Fraction, ...]]] = [[] for _ in entry.tuple_codes]
    for code, lower in zip(level.codes, level.lowers):
        b = block_of.get(code >> shift)
        if b is not None:
            out[b].append(lower)
    if any(not blk for blk in out):
        raise EntryNotProcessed(f"entry {entry.index} has an empty tuple block")
    return out


def _recover_residue(
    np_: NormalizedPattern, block: int, lower: tuple[Fraction, ...], delta: Fraction
) -> int:
    """Signed lattice residue sum of one placed cube; exact or GapViolated."""
    residue = 0
    half = Fraction(1, 2)
    c4 = 4 * np_.peak
    for v in range(np_.d):
        y = lower[v] / delta + half
        shift = 2 * np_.peak if (block == np_.m - 1 and v == np_.pivot) else 0
        z = (y - shift) / (c4 * np_.scales[block][v])
        if z.denominator != 1:
            raise GapViolated(
                f"cube at {lower} is off the avoidance lattice on axis {v}"
            )
        b = np_.base.coeffs[block][v]
        if b > 0:
            residue += z.numerator
        elif b < 0:
            residue -= z.numerator
    return residue


def _min_half_offset(residues: list[list[int]]) -> tuple[Fraction, bool]:
    """min |n_1 + ... + n_m + 1/2| over per-block residue choices.

    All blocks but one are folded into an exact sumset (residues of placed
    cubes are nearly contiguous integers, so sumsets stay small); the last
    block is resolved by binary search around the half-integer target.
    Returns (minimum, exact); exact=False falls back to the structural
    bound 1/2 when the sumset outgrows COMBO_CAP.
    """
    half = Fraction(1, 2)
    sets = sorted((sorted(set(r)) for r in residues), key=len)
    acc: list[int] = [0]
    for s in sets[:-1]:
        if len(acc) * len(s) > COMBO_CAP:
            return half, False
        acc = sorted({a + b for a in acc for b in s})
    last = sets[-1]
    best = None
    for a in acc:
        # n_last closest to -1/2 - a lies at one of these two positions
        i = bisect.bisect_left(last, -a)
        for j in (i - 1, i):
            if 0 <= j < len(last):
                v = abs(Fraction(a + last[j]) + half)
                if best is None or v < best:
                    best = v
    return best, True


def certify_gap(state: ConstructionState, entry: ScheduleEntry | int) -> GapCertificate:
    """Recompute the avoidance gap of one processed entry from the geometry.

    Verifies the lattice form of every placed cube, the half-integer value
    of psi on center combinations, and returns gap >= peak*delta as the
    certified bound over all point tuples drawn from the placed cubes.
    """
    entry = _entry_of(state, entry)
    np_ = state.normalized[entry.pattern_id]
    delta = state.side(entry.m_level)
    blocks = placed_blocks(state, entry)
    residues = [
        [_recover_residue(np_, b, lower, delta) for lower in blk]
        for b, blk in enumerate(blocks)
    ]
    q_min, exact = _min_half_offset(residues)
    _cross_check_centers(state, entry, np_, blocks, delta)
    threshold = np_.peak * delta
    gap = 4 * np_.peak * delta * q_min - threshold
    if gap < threshold:
        raise GapViolated(
            f"entry {entry.index}: center gap {gap} below threshold {threshold}"
        )
    return GapCertificate(
        entry_index=entry.index,
        pattern_id=entry.pattern_id,
        m_level=entry.m_level,
        gap=gap,
        threshold=threshold,
        placed_counts=tuple(len(b) for b in blocks),
        exact_min=exact,
    )


def _cross_check_centers(state, entry, np_, blocks, delta, sample=32):
    """Dual route: psi on sampled center tuples must be 4*peak*delta*(n+1/2)."""
    half = delta / 2
    rng = random.Random(entry.index)
    for _ in range(sample):
        centers = [
            tuple(x + half for x in blk[rng.randrange(len(blk))]) for blk in blocks
        ]
        val = eval_pattern(np_, centers)
        ratio = val / (4 * np_.peak * delta) - Fraction(1, 2)
        if ratio.denominator != 1:
            raise GapViolated(
                f"entry {entry.index}: psi(centers) = {val} is not a half-integer "
                "multiple of 4*peak*delta"
            )
        if abs(val) < 2 * np_.peak * delta:
            raise GapViolated(f"entry {entry.index}: center value {val} too small")


def spot_check_gap(
    state: ConstructionState,
    entry: ScheduleEntry | int,
    cert: GapCertificate,
    count: int = 100,
    seed: int = 2024,
    grid: int = 1 << 16,
) -> None:
    """Random rational point tuples from the placed cubes must respect the gap."""
    entry = _entry_of(state, entry)
    np_ = state.normalized[entry.pattern_id]
    delta = state.side(entry.m_level)
    blocks = placed_blocks(state, entry)
    rng = random.Random(seed * 1_000_003 + entry.index)
    for _ in range(count):
        points = []
        for blk in blocks:
            lower = blk[rng.randrange(len(blk))]
            points.append(
                tuple(x + Fraction(rng.randint(0, grid), grid) * delta for x in lower)
            )
        val = eval_pattern(np_, points)
        if abs(val) < cert.gap:
            raise GapViolated(
                f"entry {entry.index}: sampled tuple gives |psi| = {abs(val)} < gap {cert.gap}"
            )


def certify_measure(
    state: ConstructionState, precision: int = 32
) -> MeasureCertificate:
    """Per-level mass bounds from the first avoidance level to the depth.

    mass_ok certifies 1/N_k <= h(sqrt(d)*delta_k) through the increasing
    gauge at the rounded-down radius; ratio_ok re-verifies the schedule's
    ratio condition at the built level (the "for all k >= M_i" side).
    precision seeds the interval refinement for logarithmic gauges.
    """
    if not state.entries:
        raise EntryNotProcessed("no avoidance level was processed; build deeper")
    k0 = state.m_levels[0]
    lo, hi = sqrt_d_bounds(state.d)
    betas = state.processed_betas()
    verdicts = []
    for k in range(k0, state.depth + 1):
        side = state.side(k)
        count = state.expected_count(k)
        try:
            mass_ok = state.h.ge(lo * side, Fraction(1, count), precision)
        except (OutOfDomain, Undecidable):
            mass_ok = False
        active = sum(1 for M in state.m_levels if M <= k)
        try:
            ratio_ok = state.h.ratio_ge(
                hi * side, Fraction(ratio_threshold(active, betas, state.d)), precision
            )
        except (OutOfDomain, Undecidable):
            ratio_ok = False
        verdicts.append(
            LevelVerdict(level=k, count=count, side=side, mass_ok=mass_ok, ratio_ok=ratio_ok)
        )
        if not (mass_ok and ratio_ok):
            raise MeasureViolated(k, f"mass/ratio bound fails at level {k}")
    c2 = 1 << state.d
    c3 = c2 * (2 * hi + 3) ** state.d
    return MeasureCertificate(
        c1=1,
        c2=c2,
        c3_upper=c3,
        k0=k0,
        depth=state.depth,
        per_level=tuple(verdicts),
        lower_bound=1 / c3,
        conditional=(
            "lower bound for the h-Hausdorff measure of the limit set, "
            "conditional on the construction continuing by the same schedule; "
            "avoidance is certified for the tuples of processed entries only"
        ),
    )


# -- brute-force oracle -----------------------------------------------------

def brute_oracle(
    points: list[tuple[Fraction, ...]],
    pattern: LinearPattern | NormalizedPattern,
    tolerance: Fraction = Fraction(0),
    warn_cap: int = ORACLE_TUPLE_WARN,
) -> list[tuple[int, ...]]:
    """All ordered m-tuples of distinct points with |psi| <= tolerance.

    Exhaustive and exact; completely independent of the engine's lattice
    bookkeeping, which is what makes it the oracle.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    if len(set(points)) != len(points):
        raise ValueError("oracle points must be pairwise distinct")
    coeffs = pattern.coeffs if isinstance(pattern, LinearPattern) else pattern.base.coeffs
    m = len(coeffs)
    n = len(points)
    total = 1
    for j in range(m):
        total *= max(n - j, 0)
    if total > warn_cap:
        warnings.warn(f"oracle will evaluate {total} tuples", stacklevel=2)
    # Per-block linear part of psi at each point; psi(tuple) is then a sum.
    partial = [
        [sum((b * x[v] for v, b in enumerate(row) if b), Fraction(0)) for x in points]
        for row in coeffs
    ]
    hits = []
    for combo in permutations(range(n), m):
        val = Fraction(0)
        for block, idx in enumerate(combo):
            val += partial[block][idx]
        if abs(val) <= tolerance:
            hits.append(combo)
    return hits


def instance_covered(
    state: ConstructionState,
    entry: ScheduleEntry,
    points: list[tuple[Fraction, ...]],
    instance: tuple[int, ...],
    _cache: dict | None = None,
) -> bool:
    """Is this oracle instance a tuple the entry's certificate covers?

    The instance is in the original pattern's block order; coverage holds
    when, after the normalization permutation, each point lies inside some
    placed cube of the matching block.
    """
    np_ = state.normalized[entry.pattern_id]
    key = ("blocks", entry.index)
    if _cache is not None and key in _cache:
        blocks = _cache[key]
    else:
        blocks = placed_blocks(state, entry)
        if _cache is not None:
            _cache[key] = blocks
    side = state.side(entry.m_level)
    for b in range(np_.m):
        x = points[instance[np_.perm[b]]]
        if not any(
            all(lo[v] <= x[v] <= lo[v] + side for v in range(state.d))
            for lo in blocks[b]
        ):
            return False
    return True


def covered_violations(
    state: ConstructionState,
    points: list[tuple[Fraction, ...]],
    tolerance: Fraction = Fraction(0),
) -> dict[int, list[tuple[int, ...]]]:
    """Oracle instances that the processed entries claim cannot exist.

    Runs the oracle for every input pattern and cross-references each
    instance against every processed entry of that pattern.  A non-empty
    result is a broken certificate (or a corrupted tree).
    """
    cache: dict = {}
    bad: dict[int, list[tuple[int, ...]]] = {}
    for pid, pat in enumerate(state.patterns):
        entries = [e for e in state.entries if e.pattern_id == pid]
        if not entries:
            continue
        for inst in brute_oracle(points, pat, tolerance):
            for e in entries:
                if instance_covered(state, e, points, inst, cache):
                    bad.setdefault(e.index, []).append(inst)
    return bad


def covered_instance_scan(
    state: ConstructionState,
    points: list[tuple[Fraction, ...]],
    entry: ScheduleEntry | int,
) -> list[tuple[int, ...]]:
    """Exact zeros of psi over the full covered product of one entry.

    Groups the points by the entry's placed blocks and enumerates every
    combination, resolving the last block by exact-value lookup, so deep
    builds stay tractable where the all-tuples oracle would not.  Returns
    instances as point-index tuples in normalized block order.
    """
    entry = _entry_of(state, entry)
    np_ = state.normalized[entry.pattern_id]
    blocks = placed_blocks(state, entry)
    side = state.side(entry.m_level)
    groups: list[list[int]] = []
    for blk in blocks:
        members = [
            i
            for i, x in enumerate(points)
            if any(
                all(lo[v] <= x[v] <= lo[v] + side for v in range(state.d))
                for lo in blk
            )
        ]
        groups.append(members)
    coeffs = np_.base.coeffs
    partial = [
        {
            i: sum((b * points[i][v] for v, b in enumerate(row) if b), Fraction(0))
            for i in grp
        }
        for row, grp in zip(coeffs, groups)
    ]
    last = partial[-1]
    by_value: dict[Fraction, list[int]] = {}
    for i, val in last.items():
        by_value.setdefault(val, []).append(i)
    hits = []
    for combo in product(*groups[:-1]):
        if len(set(combo)) != len(combo):
            continue
        acc = sum((partial[b][i] for b, i in enumerate(combo)), Fraction(0))
        for j in by_value.get(-acc, ()):
            if j not in combo:
                hits.append(combo + (j,))
    return hits


# -- diagnostics ----------------------------------------------------------------

def box_dimension_profile(
    state: ConstructionState, precision: int = 30
) -> list[dict]:
    """Per-level log2 N_k vs log2(1/delta_k) with certified log enclosures."""
    out = []
    betas = state.processed_betas()
    for k in range(1, state.depth + 1):
        log_n = state.d * state.ndigits(k)
        lo = hi = Fraction(k)
        for M, b in zip(state.m_levels, betas):
            if M <= k:
                bl, bh = ln_bounds(Fraction(b), precision)
                l2l, l2h = ln2_bounds(precision)
                lo += bl / l2h
                hi += bh / l2l
        out.append(
            {
                "k": k,
                "log2_count": log_n,
                "log2_inv_side": (lo, hi),
                "ratio": (Fraction(log_n) / hi, Fraction(log_n) / lo),
            }
        )
    return out


# -- certificate documents ----------------------------------------------------------

CERT_FORMAT = "lacuna-cert/1"


@dataclass(frozen=True)
class AvoidanceReport:
    """Aggregate of everything a run certifies: gaps, measure, oracle runs."""

    gaps: tuple[GapCertificate, ...]
    measure: MeasureCertificate | None
    oracle_runs: tuple[dict, ...] = ()

    def all_pass(self) -> bool:
        gaps_ok = all(g.gap >= g.threshold for g in self.gaps)
        measure_ok = self.measure is None or all(
            v.mass_ok and v.ratio_ok for v in self.measure.per_level
        )
        oracle_ok = all(not run.get("covered_violations") for run in self.oracle_runs)
        return gaps_ok and measure_ok and oracle_ok

    def to_doc(self) -> dict:
        return certificates_to_doc(list(self.gaps), self.measure, list(self.oracle_runs))


def gap_to_doc(cert: GapCertificate) -> dict:
    return {
        "i": cert.entry_index,
        "pattern_id": cert.pattern_id,
        "M_i": cert.m_level,
        "gap": format_rational(cert.gap),
        "threshold": format_rational(cert.threshold),
        "placed": list(cert.placed_counts),
        "exact_min": cert.exact_min,
    }


def measure_to_doc(cert: MeasureCertificate) -> dict:
    return {
        "c1": cert.c1,
        "c2": cert.c2,
        "c3_upper": format_rational(cert.c3_upper),
        "k0": cert.k0,
        "depth": cert.depth,
        "lower_bound": format_rational(cert.lower_bound),
        "conditional": cert.conditional,
        "per_level": [
            {
                "k": v.level,
                "count": v.count,
                "side": format_rational(v.side),
                "mass_ok": v.mass_ok,
                "ratio_ok": v.ratio_ok,
            }
            for v in cert.per_level
        ],
    }


def certificates_to_doc(
    gaps: list[GapCertificate],
    measure: MeasureCertificate | None,
    oracle_runs: list[dict] | None = None,
) -> dict:
    return {
        "format": CERT_FORMAT,
        "gaps": [gap_to_doc(g) for g in gaps],
        "measure": None if measure is None else measure_to_doc(measure),
        "oracle_runs": oracle_runs or [],
    }
