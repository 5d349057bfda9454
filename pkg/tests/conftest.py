from __future__ import annotations

from fractions import Fraction

import pytest

from lacuna.dimfn import make_dimfn
from lacuna.engine import build_tree
from lacuna.pattern import make_pattern


@pytest.fixture(scope="session")
def ap_pattern():
    return make_pattern(1, [[1], [-2], [1]])


@pytest.fixture(scope="session")
def quotient2_pattern():
    return make_pattern(1, [[2], [-1]])


@pytest.fixture(scope="session")
def sqrt_gauge():
    return make_dimfn("pow", Fraction(1, 2), 1)


@pytest.fixture(scope="session")
def ap_tree_12(ap_pattern, sqrt_gauge):
    """Depth-12 build for the 3-term AP pattern under h = x^(1/2)."""
    return build_tree(1, [ap_pattern], sqrt_gauge, 12)


@pytest.fixture(scope="session")
def ap_tree_7(ap_pattern, sqrt_gauge):
    return build_tree(1, [ap_pattern], sqrt_gauge, 7)
