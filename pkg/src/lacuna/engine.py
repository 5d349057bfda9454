"""Nested cube construction: E_0 = [1,2]^d down to a requested depth.

Levels come in two kinds.  Ordinary levels bisect every cube dyadically into
2^d children.  Avoidance levels (one per processed schedule entry) give every
cube exactly one child: cubes below a tuple member get the lattice cube

    delta_k * (4*peak*phi_block(z) + [-1/2, 1/2]^d),   z integer vector,

every other cube keeps a child anchored at its own lower corner.  All
geometry is exact rational; every placement is asserted to stay inside its
parent, so the construction is self-verifying against the shrink factor
2*beta between an avoidance level and its parent level.

Addresses are digit strings in base 2^d, one digit per ordinary level
(avoidance levels pass through without adding a digit), packed into ints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from pathlib import Path
from typing import Sequence

from .dimfn import DimensionFunction, parse_dimfn
from .errors import (
    FormatError,
    PlacementFailure,
    ScheduleOverflow,
    Starved,
    StructureViolation,
    ZeroPattern,
)
from .pattern import (
    LinearPattern,
    NormalizedPattern,
    normalize,
    patterns_from_doc,
    patterns_to_doc,
)
from .qmath import format_rational, parse_rational
from .schedule import (
    DEFAULT_LEVEL_CAP,
    ScheduleEntry,
    Scheduler,
    delta_candidate,
    sqrt_d_bounds,
)

_ADDRESS_ALPHABET = "0123456789abcdefghijklmnopqrstuv"

Vector = tuple[Fraction, ...]


def render_address(code: int, ndigits: int, d: int) -> str:
    base = 1 << d
    if base > len(_ADDRESS_ALPHABET):
        raise StructureViolation(f"cannot render addresses for d={d}")
    digits = []
    for _ in range(ndigits):
        digits.append(_ADDRESS_ALPHABET[code & (base - 1)])
        code >>= d
    return "".join(reversed(digits))


def parse_address(text: str, d: int) -> int:
    base = 1 << d
    code = 0
    for ch in text:
        v = _ADDRESS_ALPHABET.index(ch)
        if v >= base:
            raise FormatError(f"address digit {ch!r} out of range for d={d}")
        code = (code << d) | v
    return code


@dataclass
class Level:
    """Cubes of one level, in lexicographic address order."""

    codes: list[int]
    lowers: list[Vector]


@dataclass
class ConstructionState:
    """The whole build: geometry per level plus the realized schedule."""

    d: int
    h: DimensionFunction
    patterns: tuple[LinearPattern, ...]
    normalized: tuple[NormalizedPattern, ...]
    level_cap: int
    levels: list[Level]
    m_levels: list[int] = field(default_factory=list)
    entries: list[ScheduleEntry] = field(default_factory=list)
    scheduler: Scheduler | None = None
    pending: ScheduleEntry | None = None

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def processed_betas(self) -> list[int]:
        return [e.beta for e in self.entries]

    def ndigits(self, level: int) -> int:
        return level - sum(1 for M in self.m_levels if M <= level)

    def side(self, level: int) -> Fraction:
        applied = [e.beta for e in self.entries if e.m_level <= level]
        return delta_candidate(level, applied)

    def expected_count(self, level: int) -> int:
        return 1 << (self.d * self.ndigits(level))

    def address(self, level: int, idx: int) -> str:
        return render_address(self.levels[level].codes[idx], self.ndigits(level), self.d)

    def leaf_centers(self) -> list[Vector]:
        half = self.side(self.depth) / 2
        return [
            tuple(c + half for c in lower) for lower in self.levels[self.depth].lowers
        ]


def init_state(
    d: int,
    patterns: Sequence[LinearPattern],
    h: DimensionFunction,
    level_cap: int = DEFAULT_LEVEL_CAP,
) -> ConstructionState:
    """Fresh state holding the single level-0 cube [1,2]^d."""
    if not patterns:
        raise ZeroPattern("at least one pattern is required")
    if h.d != d:
        raise StructureViolation(f"gauge certified for d={h.d}, build is d={d}")
    for p in patterns:
        if p.d != d:
            raise StructureViolation("pattern dimension does not match the build")
    normalized = tuple(normalize(p) for p in patterns)
    state = ConstructionState(
        d=d,
        h=h,
        patterns=tuple(patterns),
        normalized=normalized,
        level_cap=level_cap,
        levels=[Level(codes=[0], lowers=[tuple(Fraction(1) for _ in range(d))])],
    )
    state.scheduler = Scheduler(list(normalized), h, level_cap)
    return state


def place_on_lattice(
    parent_lower: Vector,
    parent_side: Fraction,
    np_: NormalizedPattern,
    block: int,
    delta_k: Fraction,
    sqrt_d_hi: Fraction,
) -> tuple[Vector, tuple[int, ...]]:
    """Lattice child of a tuple-descendant cube; returns (lower corner, z).

    In parent coordinates rescaled by 1/delta_k, the child center is the
    nearest point of 4*peak*phi_block(Z^d) to the parent center; rounding
    ties go up.  Exact per-axis error bound 2*peak*scale (hence Euclidean
    distance at most 2*peak*max_scale*sqrt(d)) and exact containment are
    asserted on every placement.
    """
    half = Fraction(1, 2)
    c4 = 4 * np_.peak
    d = np_.d
    z: list[int] = []
    lower: list[Fraction] = []
    err_sq = Fraction(0)
    for v in range(d):
        x_v = (parent_lower[v] + parent_side / 2) / delta_k
        shift = 2 * np_.peak if (block == np_.m - 1 and v == np_.pivot) else Fraction(0)
        step = c4 * np_.scales[block][v]
        z_v = floor((x_v - shift) / step + half)
        center_v = step * z_v + shift
        err = x_v - center_v
        if abs(err) > 2 * np_.peak * np_.scales[block][v]:
            raise PlacementFailure(
                f"lattice point misses the parent center by {err} on axis {v}"
            )
        err_sq += err * err
        lo = delta_k * (center_v - half)
        if lo < parent_lower[v] or lo + delta_k > parent_lower[v] + parent_side:
            raise PlacementFailure(
                f"lattice cube escapes its parent on axis {v} (lower {lo})"
            )
        z.append(z_v)
        lower.append(lo)
    bound = 2 * np_.peak * np_.max_scale * sqrt_d_hi
    if err_sq > bound * bound:
        raise PlacementFailure("lattice offset exceeds the certified ball radius")
    return tuple(lower), tuple(z)


def _advance_dyadic(state: ConstructionState, k: int) -> None:
    d = state.d
    delta_k = state.side(k - 1) / 2
    prev = state.levels[-1]
    codes: list[int] = []
    lowers: list[Vector] = []
    offsets = [
        tuple(delta_k if (digit >> v) & 1 else Fraction(0) for v in range(d))
        for digit in range(1 << d)
    ]
    for code, lower in zip(prev.codes, prev.lowers):
        base = code << d
        for digit, off in enumerate(offsets):
            codes.append(base | digit)
            lowers.append(
                lower
                if digit == 0
                else tuple(lv + ov if ov else lv for lv, ov in zip(lower, off))
            )
    state.levels.append(Level(codes=codes, lowers=lowers))


def _advance_avoidance(state: ConstructionState, k: int, entry: ScheduleEntry) -> None:
    np_ = state.normalized[entry.pattern_id]
    d = state.d
    parent_side = state.side(k - 1)
    delta_k = parent_side / (2 * entry.beta)
    _, sqrt_hi = sqrt_d_bounds(d)
    prev = state.levels[-1]
    nd_parent = state.ndigits(k - 1)
    nd_tuple = state.ndigits(entry.level)
    shift_bits = d * (nd_parent - nd_tuple)
    block_of = {t_code: b for b, t_code in enumerate(entry.tuple_codes)}
    codes: list[int] = []
    lowers: list[Vector] = []
    for code, lower in zip(prev.codes, prev.lowers):
        block = block_of.get(code >> shift_bits)
        if block is None:
            child = lower  # free cube: keep the lower-corner anchor
        else:
            child, _ = place_on_lattice(
                lower, parent_side, np_, block, delta_k, sqrt_hi
            )
        codes.append(code)
        lowers.append(child)
    state.levels.append(Level(codes=codes, lowers=lowers))


def advance_level(state: ConstructionState) -> None:
    """Construct the next level, pulling a schedule entry when one is due."""
    k = state.depth + 1
    if k > state.level_cap:
        raise ScheduleOverflow(f"depth {k} exceeds the level cap {state.level_cap}")
    if state.scheduler is None:
        raise StructureViolation("state was loaded from a tree file; rebuild instead")
    if state.pending is None:
        try:
            state.pending = state.scheduler.next_entry(
                [lvl.codes for lvl in state.levels], step=k
            )
        except Starved:
            state.pending = None
    if state.pending is not None and state.pending.m_level == k:
        entry = state.pending
        _advance_avoidance(state, k, entry)
        state.entries.append(entry)
        state.m_levels.append(k)
        state.pending = None
    else:
        _advance_dyadic(state, k)
    if len(state.levels[-1].codes) != state.expected_count(k):
        raise StructureViolation(f"cube count at level {k} disagrees with the profile")


def build(state: ConstructionState, depth: int) -> ConstructionState:
    """Advance to the requested depth; deterministic in all inputs."""
    if depth < 0:
        raise StructureViolation("depth must be >= 0")
    while state.depth < depth:
        advance_level(state)
    return state


def build_tree(
    d: int,
    patterns: Sequence[LinearPattern],
    h: DimensionFunction,
    depth: int,
    level_cap: int = DEFAULT_LEVEL_CAP,
) -> ConstructionState:
    if depth > level_cap:
        raise ScheduleOverflow(f"depth {depth} exceeds the level cap {level_cap}")
    return build(init_state(d, patterns, h, level_cap), depth)


# -- structural validation --------------------------------------------------

def validate_structure(state: ConstructionState) -> None:
    """Exact re-verification of counts, sides, nestedness and tiling.

    Dyadic children must sit at their exact dyadic offsets and avoidance
    children inside their unique parent, which together prove pairwise
    non-overlap by induction from the single root cube.
    """
    d = state.d
    root = state.levels[0]
    if root.codes != [0] or root.lowers != [tuple(Fraction(1) for _ in range(d))]:
        raise StructureViolation("level 0 is not the unit cube at (1,...,1)")
    for k in range(1, state.depth + 1):
        level = state.levels[k]
        if len(level.codes) != state.expected_count(k):
            raise StructureViolation(f"level {k}: cube count != profile value")
        if any(a >= b for a, b in zip(level.codes, level.codes[1:])):
            raise StructureViolation(f"level {k}: addresses not strictly sorted")
        parent = state.levels[k - 1]
        parent_at = {code: lower for code, lower in zip(parent.codes, parent.lowers)}
        delta_k = state.side(k)
        parent_side = state.side(k - 1)
        if k in state.m_levels:
            if len(level.codes) != len(parent.codes):
                raise StructureViolation(f"level {k}: avoidance level must keep counts")
            for code, lower in zip(level.codes, level.lowers):
                plower = parent_at.get(code)
                if plower is None:
                    raise StructureViolation(f"level {k}: cube {code} has no parent")
                for v in range(d):
                    if not (plower[v] <= lower[v] and lower[v] + delta_k <= plower[v] + parent_side):
                        raise StructureViolation(
                            f"level {k}: cube {code} escapes its parent on axis {v}"
                        )
        else:
            seen_per_parent: dict[int, int] = {}
            for code, lower in zip(level.codes, level.lowers):
                pcode, digit = code >> d, code & ((1 << d) - 1)
                plower = parent_at.get(pcode)
                if plower is None:
                    raise StructureViolation(f"level {k}: cube {code} has no parent")
                seen_per_parent[pcode] = seen_per_parent.get(pcode, 0) + 1
                for v in range(d):
                    expect = plower[v] + (delta_k if (digit >> v) & 1 else 0)
                    if lower[v] != expect:
                        raise StructureViolation(
                            f"level {k}: cube {code} is off its dyadic slot on axis {v}"
                        )
            if any(n != 1 << d for n in seen_per_parent.values()) or len(
                seen_per_parent
            ) != len(parent.codes):
                raise StructureViolation(f"level {k}: dyadic children do not tile")


# -- tree (de)serialization -----------------------------------------------------

TREE_FORMAT = "lacuna-tree/1"


def state_to_doc(state: ConstructionState) -> dict:
    pat_doc = patterns_to_doc(state.d, state.patterns)
    return {
        "format": TREE_FORMAT,
        "d": state.d,
        "h": state.h.spec_string(),
        "depth": state.depth,
        "level_cap": state.level_cap,
        "patterns": pat_doc["patterns"],
        "betas": [e.beta for e in state.entries],
        "levels_M": list(state.m_levels),
        "schedule": [entry_to_doc(state, e) for e in state.entries],
        "cubes": {
            str(k): [
                {
                    "addr": render_address(code, state.ndigits(k), state.d),
                    "lower": [format_rational(x) for x in lower],
                }
                for code, lower in zip(lvl.codes, lvl.lowers)
            ]
            for k, lvl in enumerate(state.levels)
        },
    }


def entry_to_doc(state: ConstructionState, e: ScheduleEntry) -> dict:
    nd = state.ndigits(e.level)
    return {
        "i": e.index,
        "pattern_id": e.pattern_id,
        "level": e.level,
        "tuple": [render_address(c, nd, state.d) for c in e.tuple_codes],
        "M_i": e.m_level,
        "beta_i": e.beta,
    }


def doc_to_state(doc: dict) -> ConstructionState:
    """Rebuild a state from a tree document (read-only: no scheduler)."""
    try:
        if doc.get("format") != TREE_FORMAT:
            raise FormatError(f"unknown tree format {doc.get('format')!r}")
        d = int(doc["d"])
        _, patterns = patterns_from_doc({"d": d, "patterns": doc["patterns"]})
        h = parse_dimfn(doc["h"], d)
        state = ConstructionState(
            d=d,
            h=h,
            patterns=tuple(patterns),
            normalized=tuple(normalize(p) for p in patterns),
            level_cap=int(doc["level_cap"]),
            levels=[],
        )
        state.m_levels = [int(x) for x in doc["levels_M"]]
        for rec in doc["schedule"]:
            state.entries.append(
                ScheduleEntry(
                    index=int(rec["i"]),
                    pattern_id=int(rec["pattern_id"]),
                    level=int(rec["level"]),
                    tuple_codes=tuple(parse_address(a, d) for a in rec["tuple"]),
                    m_level=int(rec["M_i"]),
                    beta=int(rec["beta_i"]),
                )
            )
        depth = int(doc["depth"])
        for k in range(depth + 1):
            cubes = doc["cubes"][str(k)]
            state.levels.append(
                Level(
                    codes=[parse_address(c["addr"], d) for c in cubes],
                    lowers=[tuple(parse_rational(x) for x in c["lower"]) for c in cubes],
                )
            )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FormatError(f"malformed tree document: {exc}") from exc
    return state


def write_tree(state: ConstructionState, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_doc(state), fh, indent=1)
        fh.write("\n")


def read_tree(path: str | Path) -> ConstructionState:
    with open(path, "r", encoding="utf-8") as fh:
        return doc_to_state(json.load(fh))


def write_schedule_log(state: ConstructionState, path: str | Path) -> None:
    """JSON-lines log, one record per processed schedule entry."""
    with open(path, "w", encoding="utf-8") as fh:
        for e in state.entries:
            fh.write(json.dumps(entry_to_doc(state, e)))
            fh.write("\n")
