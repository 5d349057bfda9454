"""Schedule machinery: beta constants, avoidance levels, tuple enumeration.

Each served schedule entry i pairs a pattern occurrence with a tuple of
distinct same-level cube labels and an avoidance level M_i at which the
engine will place lattice cubes.  The constraints are:

* beta_i >= m_i and beta_i/2 >= max_scale * 2*peak*sqrt(d) + sqrt(d)/2
  (ball-fitting: a lattice cell plus slack fits inside the shrunk parent),
* M_1 >= 2 and M_{i+1} >= M_i + 2,
* at k = M_i the certified ratio h(sqrt(d)*delta_k)/(sqrt(d)*delta_k)^d
  clears 2^(i*d) * prod_j<=i beta_j^d, where delta_k already contains the
  new beta_i.  The gauge's monotone-ratio witness extends that single check
  to every k >= M_i (deeper levels shrink delta, which can only raise the
  ratio), and the engine re-verifies each built level anyway.

sqrt(d) is handled by a fixed rational enclosure; the upper bound is the
conservative direction both for beta (larger beta only helps the fit) and
for the ratio condition (the ratio is non-increasing, so certifying at an
over-approximated radius certifies the true one).

Tuple fairness follows a dovetailing cursor over (level, rank, pattern)
triples: round T serves all triples with level <= T and rank <= T, every
round re-serves earlier triples, so each (pattern, tuple) pair is served at
a computable first index and recurs forever.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from .dimfn import DimensionFunction
from .errors import ScheduleOverflow, Starved, Undecidable
from .pattern import NormalizedPattern
from .qmath import sqrt_bounds

#: Enclosure width for sqrt(d): hi - lo < 2**-SQRT_PRECISION.
SQRT_PRECISION = 21

DEFAULT_LEVEL_CAP = 96


def sqrt_d_bounds(d: int) -> tuple[Fraction, Fraction]:
    return sqrt_bounds(d, SQRT_PRECISION)


@dataclass(frozen=True)
class ScheduleEntry:
    """One served occurrence: pattern, tuple of cube labels, avoidance level.

    tuple_codes are packed base-2^d digit strings of same-level addresses,
    pairwise distinct, at a level <= m_level - 2.
    """

    index: int
    pattern_id: int
    level: int
    tuple_codes: tuple[int, ...]
    m_level: int
    beta: int


def compute_beta(np_: NormalizedPattern, d: int) -> int:
    """Smallest integer beta meeting the arity and ball-fitting constraints."""
    _, hi = sqrt_d_bounds(d)
    need = hi * (4 * np_.peak * np_.max_scale + 1)
    return max(np_.m, ceil(need))


def ratio_threshold(i: int, betas: list[int] | tuple[int, ...], d: int) -> int:
    """2^(i*d) * (beta_1 * ... * beta_i)^d for the i-th served entry."""
    prod = 1
    for b in betas[:i]:
        prod *= b
    return (2**i * prod) ** d


def delta_candidate(k: int, betas_applied: list[int] | tuple[int, ...]) -> Fraction:
    """Side length 2^-k * prod(1/beta) once the given betas are all active."""
    prod = 1
    for b in betas_applied:
        prod *= b
    return Fraction(1, (1 << k) * prod)


def min_ratio_level(
    h: DimensionFunction,
    betas: list[int],
    i: int,
    floor_level: int,
    level_cap: int,
) -> int:
    """Smallest k >= floor_level satisfying the i-th ratio condition.

    The condition at candidate k uses delta = 2^-k / (beta_1...beta_i): the
    entry's own beta is already active at its level.  Arguments above the
    gauge's certified cap simply do not satisfy the condition yet.
    """
    _, hi = sqrt_d_bounds(h.d)
    threshold = Fraction(ratio_threshold(i, betas, h.d))
    k = max(floor_level, 2)
    while k <= level_cap:
        r = hi * delta_candidate(k, betas[:i])
        if r <= h.domain_cap:
            try:
                if h.ratio_ge(r, threshold):
                    return k
            except Undecidable:
                pass  # not certified: keep descending
        k += 1
    raise ScheduleOverflow(
        f"ratio condition for entry {i} not reached by level cap {level_cap}"
    )


def compute_levels(
    h: DimensionFunction,
    betas: list[int] | tuple[int, ...],
    count: int | None = None,
    level_cap: int = DEFAULT_LEVEL_CAP,
) -> list[int]:
    """Greedy minimal avoidance levels M_1..M_count for given per-entry betas."""
    betas = list(betas)
    count = len(betas) if count is None else count
    if count > len(betas):
        raise ValueError("need one beta per requested level")
    levels: list[int] = []
    for i in range(1, count + 1):
        floor_level = 2 if not levels else levels[-1] + 2
        levels.append(min_ratio_level(h, betas, i, floor_level, level_cap))
    return levels


def level_profile(
    d: int, m_levels: list[int] | tuple[int, ...], betas: list[int] | tuple[int, ...], depth: int
) -> list[tuple[Fraction, int]]:
    """Exact (side length, cube count) for levels 0..depth.

    m_levels lists the processed avoidance levels in increasing order and
    betas the matching shrink constants.
    """
    out = []
    for k in range(depth + 1):
        applied = [b for M, b in zip(m_levels, betas) if M <= k]
        delta = delta_candidate(k, applied)
        count = 1 << (d * (k - len(applied)))
        out.append((delta, count))
    return out


# -- ordered tuples of distinct addresses ------------------------------------

def perm_count(n: int, m: int) -> int:
    """Number of ordered m-tuples of distinct items from n."""
    if m > n:
        return 0
    total = 1
    for j in range(m):
        total *= n - j
    return total


def unrank_tuple(n: int, m: int, rank: int) -> tuple[int, ...]:
    """rank-th ordered m-tuple of distinct indices in [0, n), lexicographic."""
    total = perm_count(n, m)
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} out of range for P({n},{m})")
    avail = list(range(n))
    out = []
    for j in range(m):
        base = perm_count(n - 1 - j, m - 1 - j)
        idx, rank = divmod(rank, base)
        out.append(avail.pop(idx))
    return tuple(out)


class TupleEnumerator:
    """Deterministic dovetailing cursor over (level, rank, pattern) triples.

    Round T yields (L, r, p) for L in 0..T, r in 0..T, p in 0..P-1 in
    lexicographic order; every triple recurs in all rounds >= max(L, r).
    The cursor only moves on explicit advance, so callers may peek, test
    admissibility, and skip dead triples without losing fairness.
    """

    def __init__(self, n_patterns: int):
        if n_patterns < 1:
            raise ValueError("need at least one pattern")
        self.n_patterns = n_patterns
        self.round = 0
        self.pos = 0

    def peek(self) -> tuple[int, int, int]:
        per_level = (self.round + 1) * self.n_patterns
        level, rest = divmod(self.pos, per_level)
        rank, pattern = divmod(rest, self.n_patterns)
        return level, rank, pattern

    def advance(self) -> None:
        self.pos += 1
        if self.pos >= (self.round + 1) ** 2 * self.n_patterns:
            self.round += 1
            self.pos = 0

    def state(self) -> tuple[int, int]:
        return self.round, self.pos


class Scheduler:
    """Serves schedule entries in (U_j) order against a growing cube tree.

    Owns the cursor and the served-entry bookkeeping; the engine asks for
    the next entry right before constructing each level.  Single-owner
    mutable state: not safe for concurrent use.
    """

    def __init__(
        self,
        normalized: list[NormalizedPattern] | tuple[NormalizedPattern, ...],
        h: DimensionFunction,
        level_cap: int = DEFAULT_LEVEL_CAP,
    ):
        self.normalized = list(normalized)
        self.h = h
        self.level_cap = level_cap
        self.enum = TupleEnumerator(len(self.normalized))
        self.betas: list[int] = [compute_beta(np_, h.d) for np_ in self.normalized]
        self.served_betas: list[int] = []
        self.served: list[ScheduleEntry] = []
        self.exhausted = False

    def _min_m(self) -> int:
        return min(np_.m for np_ in self.normalized)

    def next_entry(self, level_codes: list[list[int]], step: int) -> ScheduleEntry:
        """Serve the next entry; raises Starved when no tuple is admissible.

        level_codes[L] lists the (lexicographically sorted) address codes of
        the already-built level L; step is the level about to be built, so
        tuples may only come from levels <= step - 1.
        """
        if self.exhausted:
            raise Starved("schedule exhausted under the level cap")
        built = len(level_codes) - 1
        if not any(len(codes) >= self._min_m() for codes in level_codes):
            raise Starved("no level holds enough distinct cubes yet")
        while True:
            level, rank, pid = self.enum.peek()
            np_ = self.normalized[pid]
            if level <= built and rank < perm_count(len(level_codes[level]), np_.m):
                beta = self.betas[pid]
                i = len(self.served) + 1
                prev = self.served[-1].m_level if self.served else 0
                floor_level = max(2, prev + 2, step, level + 2)
                try:
                    m_level = min_ratio_level(
                        self.h, self.served_betas + [beta], i, floor_level, self.level_cap
                    )
                except ScheduleOverflow:
                    # Later entries need even deeper levels, so nothing more
                    # can ever be served under this cap.
                    self.exhausted = True
                    raise Starved("next avoidance level exceeds the level cap")
                codes = level_codes[level]
                picks = unrank_tuple(len(codes), np_.m, rank)
                entry = ScheduleEntry(
                    index=i,
                    pattern_id=pid,
                    level=level,
                    tuple_codes=tuple(codes[j] for j in picks),
                    m_level=m_level,
                    beta=beta,
                )
                self.enum.advance()
                self.served.append(entry)
                self.served_betas.append(beta)
                return entry
            self.enum.advance()

    def first_index(
        self,
        pattern_id: int,
        level: int,
        rank: int,
        level_codes: list[list[int]],
        max_steps: int = 10_000_000,
    ) -> int:
        """Index at which (pattern, tuple) would first be served, by direct
        replay of the cursor against a frozen tree (testing aid)."""
        probe = Scheduler(self.normalized, self.h, self.level_cap)
        for step in range(1, max_steps):
            try:
                entry = probe.next_entry(level_codes, step=level + 2)
            except Starved as exc:
                raise Starved(f"pair never served: {exc}") from exc
            if (
                entry.pattern_id == pattern_id
                and entry.level == level
                and entry.tuple_codes
                == tuple(
                    level_codes[level][j]
                    for j in unrank_tuple(
                        len(level_codes[level]), self.normalized[pattern_id].m, rank
                    )
                )
            ):
                return entry.index
        raise Starved("pair not served within the probe budget")


@dataclass(frozen=True)
class ScheduleParams:
    """Frozen snapshot of the realized schedule with its certificates."""

    betas: tuple[int, ...]
    levels: tuple[int, ...]
    sqrt_d_lo: Fraction
    sqrt_d_hi: Fraction

    def verify(self, h: DimensionFunction, normalized_by_entry: list[NormalizedPattern]) -> None:
        """Re-check every schedule invariant; raises ScheduleOverflow on failure."""
        if len(self.betas) != len(self.levels):
            raise ScheduleOverflow("beta/level lists disagree")
        prev = None
        for i, (beta, M) in enumerate(zip(self.betas, self.levels), start=1):
            np_ = normalized_by_entry[i - 1]
            if beta < np_.m:
                raise ScheduleOverflow(f"beta_{i} below pattern arity")
            if Fraction(beta, 2) < np_.max_scale * 2 * np_.peak * self.sqrt_d_hi + self.sqrt_d_hi / 2:
                raise ScheduleOverflow(f"ball-fitting inequality fails for beta_{i}")
            if M < 2 or (prev is not None and M < prev + 2):
                raise ScheduleOverflow(f"avoidance level M_{i}={M} breaks spacing")
            r = self.sqrt_d_hi * delta_candidate(M, self.betas[:i])
            try:
                ok = h.ratio_ge(r, Fraction(ratio_threshold(i, self.betas, h.d)))
            except Undecidable:
                ok = False
            if not ok:
                raise ScheduleOverflow(f"ratio condition fails at M_{i}={M}")
            prev = M


def params_from_entries(entries: list[ScheduleEntry], d: int) -> ScheduleParams:
    lo, hi = sqrt_d_bounds(d)
    return ScheduleParams(
        betas=tuple(e.beta for e in entries),
        levels=tuple(e.m_level for e in entries),
        sqrt_d_lo=lo,
        sqrt_d_hi=hi,
    )
