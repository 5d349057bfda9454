"""Gauge (dimension) functions h with h strictly below x^d, certified.

Two parametric families are supported:

* ``pow:s``     h(x) = x^s          (needs s < d)
* ``powlog:s``  h(x) = -x^s ln x    (needs s <= d; s = d gives full dimension)

Both families come with a monotone-ratio witness: on (0, domain_cap] the map
r -> h(r)/r^d is non-increasing and h itself is strictly increasing.  That
witness is what lets a single certified check at level M_i stand in for the
"for all k >= M_i" quantifier of the schedule (every deeper level only makes
the ratio larger).  For pow the witness is elementary (the ratio is
r^(s-d) with s-d < 0); for powlog the derivative of -r^(s-d) ln r is
r^(s-d-1) ((d-s) ln r - 1) < 0 on (0,1), and h itself increases up to
e^(-1/s), which is why the domain cap is clamped below that point.

All comparisons are certified: exact for pow, directed-rounded rational
intervals with escalating precision for powlog.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import OutOfDomain, RejectNonPositive, RejectNotDominated, Undecidable
from .qmath import exp_bounds, ln_bounds, nth_root_bounds, parse_rational

POWER = "pow"
POWERLOG = "powlog"

#: Hard ceiling for interval-refinement loops (bits).  The quantities compared
#: in this artifact are never equal to their rational thresholds (they involve
#: logarithms of rationals != 1), so in practice comparisons decide early.
PRECISION_CAP = 4096


@dataclass(frozen=True)
class DimensionFunction:
    """A gauge function with a certified monotone-ratio witness for exponent d.

    domain_cap is the rational right end of the certified region: h is
    strictly increasing and h(r)/r^d non-increasing on (0, domain_cap].
    """

    family: str
    s: Fraction
    d: int
    domain_cap: Fraction

    # -- identity -----------------------------------------------------------

    def spec_string(self) -> str:
        return f"{self.family}:{self.s.numerator}/{self.s.denominator}"

    # -- certified evaluation -------------------------------------------------

    def _check_domain(self, r: Fraction) -> None:
        if not (0 < r <= self.domain_cap):
            raise OutOfDomain(
                f"argument {r} outside (0, {self.domain_cap}] for {self.spec_string()}"
            )

    def eval_bounds(self, r: Fraction, precision: int) -> tuple[Fraction, Fraction]:
        """Enclosure of h(r) with width <= 2**-precision; exact when possible."""
        self._check_domain(r)
        p, q = self.s.numerator, self.s.denominator
        if self.family == POWER:
            return nth_root_bounds(r**p, q, precision)
        guard = precision + 4
        while True:
            rs_lo, rs_hi = nth_root_bounds(r**p, q, guard)
            ln_lo, ln_hi = ln_bounds(r, guard)
            # h(r) = r^s * (-ln r); both factors are >= 0 on (0, 1).
            lo, hi = rs_lo * (-ln_hi), rs_hi * (-ln_lo)
            if lo > hi:  # r == 1 edge: -ln r == 0
                lo, hi = hi, lo
            if hi - lo <= Fraction(1, 1 << precision):
                return lo, hi
            guard *= 2

    def ge(self, r: Fraction, threshold: Fraction, precision: int = 32) -> bool:
        """Certified h(r) >= threshold.

        Exact for pow; for powlog the interval is refined from the starting
        precision until it clears the threshold one way or the other
        (Undecidable at the precision cap).
        """
        self._check_domain(r)
        if threshold <= 0:
            return True
        p, q = self.s.numerator, self.s.denominator
        if self.family == POWER:
            return r**p >= threshold**q
        while precision <= PRECISION_CAP:
            lo, hi = self.eval_bounds(r, precision)
            if lo >= threshold:
                return True
            if hi < threshold:
                return False
            precision *= 2
        raise Undecidable(f"h(r) vs {threshold} undecided at {PRECISION_CAP} bits")

    def ratio_ge(self, r: Fraction, threshold: Fraction, precision: int = 32) -> bool:
        """Certified h(r)/r^d >= threshold.

        By the monotone-ratio witness a True answer at r extends to every
        smaller argument in (0, domain_cap].
        """
        self._check_domain(r)
        if threshold <= 0:
            return True
        p, q = self.s.numerator, self.s.denominator
        if self.family == POWER:
            # r^((p-dq)/q) >= t  <=>  r^(p-dq) >= t^q  (both sides positive)
            return r ** (p - self.d * q) >= threshold**q
        # powlog: ratio = (-ln r) * r^(s-d) = (-ln r) / r^((dq-p)/q)
        e = self.d * q - p
        while precision <= PRECISION_CAP:
            ln_lo, ln_hi = ln_bounds(r, precision)
            neg_lo, neg_hi = -ln_hi, -ln_lo
            if e == 0:
                lhs_lo, lhs_hi = neg_lo, neg_hi
            else:
                den_lo, den_hi = nth_root_bounds(r**e, q, precision)
                lhs_lo, lhs_hi = neg_lo / den_hi, neg_hi / den_lo
            if lhs_lo >= threshold:
                return True
            if lhs_hi < threshold:
                return False
            precision *= 2
        raise Undecidable(f"ratio vs {threshold} undecided at {PRECISION_CAP} bits")


def _powlog_cap(s: Fraction) -> Fraction:
    """Largest certified cap for powlog: min(1/2, lower bound of e^(-1/s))."""
    half = Fraction(1, 2)
    if s >= Fraction(3, 2):  # e^(-1/s) >= e^(-2/3) > 1/2
        return half
    lo, _ = exp_bounds(-1 / s, 48)
    return min(half, lo)


def make_dimfn(
    family: str,
    s: Fraction | int | str,
    d: int,
    domain_cap: Fraction | None = None,
) -> DimensionFunction:
    """Validate parameters and build a gauge with its witness.

    Raises RejectNonPositive for s <= 0 and RejectNotDominated when the
    family does not sit strictly below x^d (pow needs s < d, powlog s <= d).
    """
    if d < 1:
        raise RejectNotDominated("ambient dimension must be >= 1")
    s = Fraction(s)
    if s <= 0:
        raise RejectNonPositive(f"exponent must be positive, got {s}")
    if family == POWER:
        if s >= d:
            raise RejectNotDominated(f"x^{s} is not strictly below x^{d}")
        cap_max = Fraction(1)
    elif family == POWERLOG:
        if s > d:
            raise RejectNotDominated(f"-x^{s} ln x is not below x^{d}")
        cap_max = _powlog_cap(s)
    else:
        raise RejectNotDominated(f"unknown gauge family {family!r}")
    cap = cap_max if domain_cap is None else min(Fraction(domain_cap), cap_max)
    if cap <= 0:
        raise RejectNonPositive("domain_cap must be positive")
    return DimensionFunction(family=family, s=s, d=d, domain_cap=cap)


def parse_dimfn(spec: str, d: int) -> DimensionFunction:
    """Parse the CLI/JSON gauge syntax 'pow:p/q' or 'powlog:p/q'."""
    try:
        family, _, rest = spec.partition(":")
        return make_dimfn(family.strip(), parse_rational(rest), d)
    except (RejectNonPositive, RejectNotDominated):
        raise
    except Exception as exc:
        raise RejectNotDominated(f"bad gauge spec {spec!r}: {exc}") from exc
