from __future__ import annotations

import json
from fractions import Fraction

import pytest

from lacuna.dimfn import make_dimfn
from lacuna.engine import (
    build_tree,
    doc_to_state,
    init_state,
    parse_address,
    place_on_lattice,
    render_address,
    state_to_doc,
    validate_structure,
    write_schedule_log,
    write_tree,
)
from lacuna.errors import (
    PlacementFailure,
    ScheduleOverflow,
    StructureViolation,
    ZeroPattern,
)
from lacuna.pattern import make_pattern, normalize
from lacuna.schedule import level_profile

F = Fraction


class TestInit:
    def test_unit_interval(self, ap_pattern, sqrt_gauge):
        st = init_state(1, [ap_pattern], sqrt_gauge)
        assert st.depth == 0
        assert st.levels[0].lowers == [(F(1),)]
        assert st.side(0) == 1

    def test_unit_square(self):
        p = make_pattern(2, [[1, 0], [-1, 0], [1, 0], [-1, 0]])
        h = make_dimfn("pow", F(1, 4), 2)
        st = init_state(2, [p], h)
        assert st.levels[0].lowers == [(F(1), F(1))]

    def test_no_patterns_rejected(self, sqrt_gauge):
        with pytest.raises(ZeroPattern):
            init_state(1, [], sqrt_gauge)

    def test_gauge_dimension_must_match(self, ap_pattern):
        h = make_dimfn("pow", F(1, 2), 2)
        with pytest.raises(StructureViolation):
            init_state(1, [ap_pattern], h)


class TestDyadicSplit:
    def test_first_level(self, ap_pattern, sqrt_gauge):
        st = build_tree(1, [ap_pattern], sqrt_gauge, 1)
        assert st.levels[1].lowers == [(F(1),), (F(3, 2),)]

    def test_d2_digit_semantics(self):
        p = make_pattern(2, [[1, 0], [-1, 0], [1, 0], [-1, 0]])
        h = make_dimfn("pow", F(1, 4), 2)
        st = build_tree(2, [p], h, 1)
        # digit = sum of bit_v * 2^v, bit selects the upper half on axis v.
        assert st.levels[1].lowers == [
            (F(1), F(1)),
            (F(3, 2), F(1)),
            (F(1), F(3, 2)),
            (F(3, 2), F(3, 2)),
        ]


class TestPlacement:
    def test_worked_example_last_block(self, ap_pattern):
        # Level-5 parent [1, 33/32] rescaled by 576 is [576, 594], center 585;
        # the shifted lattice 8z + 4 rounds to z = 73, child [1175, 1177]/1152.
        n = normalize(ap_pattern)
        lower, z = place_on_lattice((F(1),), F(1, 32), n, 2, F(1, 576), F(1))
        assert z == (73,)
        assert lower == (F(1175, 1152),)

    def test_first_block_unshifted(self, ap_pattern):
        n = normalize(ap_pattern)
        lower, z = place_on_lattice((F(1),), F(1, 32), n, 0, F(1, 576), F(1))
        assert z == (73,)  # lattice 8z, center 584, offset 1
        assert lower == (F(1167, 1152),)

    def test_exact_lattice_hit_keeps_center(self, ap_pattern):
        # Parent centered exactly on a lattice point: offset must be zero.
        n = normalize(ap_pattern)
        delta = F(1, 576)
        parent = (F(584) * delta - F(1, 64),)  # center at 584*delta
        lower, z = place_on_lattice(parent, F(1, 32), n, 0, delta, F(1))
        assert z == (73,)
        assert lower == (F(584) * delta - delta / 2,)

    def test_child_inside_parent_everywhere(self, ap_tree_12):
        st = ap_tree_12
        for entry in st.entries:
            k = entry.m_level
            delta, parent_side = st.side(k), st.side(k - 1)
            prev = {c: lo for c, lo in zip(st.levels[k - 1].codes, st.levels[k - 1].lowers)}
            for code, lower in zip(st.levels[k].codes, st.levels[k].lowers):
                plo = prev[code]
                assert all(
                    plo[v] <= lower[v] and lower[v] + delta <= plo[v] + parent_side
                    for v in range(st.d)
                )

    def test_free_cubes_keep_lower_corner(self, ap_tree_7):
        # Level-5 cubes outside the scheduled tuple (below address "11")
        # each keep a child anchored at their own lower corner at M_1 = 6.
        st = ap_tree_7
        entry = st.entries[0]
        members = set(entry.tuple_codes)
        shift = st.ndigits(5) - st.ndigits(entry.level)
        parents = {
            c: lo for c, lo in zip(st.levels[5].codes, st.levels[5].lowers)
        }
        free = [c for c in parents if (c >> shift) not in members]
        assert free  # address "11" has 8 level-5 descendants
        children = {c: lo for c, lo in zip(st.levels[6].codes, st.levels[6].lowers)}
        for c in free:
            assert children[c] == parents[c]

    def test_impossible_fit_raises(self, ap_pattern):
        # Feed a parent far too small for the lattice spacing.
        n = normalize(ap_pattern)
        with pytest.raises(PlacementFailure):
            place_on_lattice((F(1),), F(1, 512), n, 0, F(1, 1024), F(1))


class TestBuild:
    def test_depth_zero(self, ap_pattern, sqrt_gauge):
        st = build_tree(1, [ap_pattern], sqrt_gauge, 0)
        assert st.depth == 0 and st.entries == []

    def test_depth_seven_counts(self, ap_tree_7):
        assert len(ap_tree_7.levels[7].codes) == 64
        assert ap_tree_7.side(7) == F(1, 1152)
        assert ap_tree_7.m_levels == [6]

    def test_depth_twelve_counts(self, ap_tree_12):
        st = ap_tree_12
        assert st.m_levels == [6, 11]
        assert len(st.levels[12].codes) == 1024
        assert st.side(12) == F(1, 2**12 * 81)

    def test_profile_matches_at_every_level(self, ap_tree_12):
        st = ap_tree_12
        prof = level_profile(1, st.m_levels, st.processed_betas(), 12)
        for k in range(13):
            assert st.side(k) == prof[k][0]
            assert len(st.levels[k].codes) == prof[k][1]

    def test_first_entry_matches_enumerator(self, ap_tree_12):
        e = ap_tree_12.entries[0]
        assert (e.level, e.tuple_codes, e.m_level, e.beta) == (2, (0, 1, 2), 6, 9)
        e2 = ap_tree_12.entries[1]
        assert (e2.level, e2.tuple_codes, e2.m_level) == (2, (0, 1, 3), 11)

    def test_determinism(self, ap_pattern, sqrt_gauge, ap_tree_12):
        again = build_tree(1, [ap_pattern], sqrt_gauge, 12)
        assert state_to_doc(again) == state_to_doc(ap_tree_12)

    def test_depth_above_cap(self, ap_pattern, sqrt_gauge):
        with pytest.raises(ScheduleOverflow):
            build_tree(1, [ap_pattern], sqrt_gauge, 12, level_cap=10)

    def test_d2_avoidance_level(self):
        p = make_pattern(2, [[1, 0], [-1, 0], [1, 0], [-1, 0]])
        h = make_dimfn("pow", F(1, 4), 2)
        st = build_tree(2, [p], h, 3)
        assert st.m_levels == [3]
        assert len(st.levels[3].codes) == 16
        validate_structure(st)


class TestValidation:
    def test_valid_tree_passes(self, ap_tree_12):
        validate_structure(ap_tree_12)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda doc: doc["cubes"]["7"][3].update(lower=["2/1"]),
            lambda doc: doc["cubes"]["6"][0].update(lower=["1/2"]),
            lambda doc: doc["cubes"]["12"].pop(),
        ],
        ids=["off-slot", "escapes-parent", "missing-cube"],
    )
    def test_corruption_detected(self, ap_tree_12, mutate):
        doc = json.loads(json.dumps(state_to_doc(ap_tree_12)))
        mutate(doc)
        with pytest.raises(StructureViolation):
            validate_structure(doc_to_state(doc))


class TestAddresses:
    def test_roundtrip(self):
        for d in (1, 2, 3):
            code = 0b1011010 & ((1 << (d * 3)) - 1)
            s = render_address(code, 3, d)
            assert parse_address(s, d) == code
            assert len(s) == 3

    def test_known_strings(self):
        assert render_address(0b01, 2, 1) == "01"
        assert render_address(0b1110, 2, 2) == "32"


class TestSerialization:
    def test_tree_roundtrip(self, ap_tree_12, tmp_path):
        path = tmp_path / "tree.json"
        write_tree(ap_tree_12, path)
        from lacuna.engine import read_tree

        st = read_tree(path)
        assert st.levels[12].lowers == ap_tree_12.levels[12].lowers
        assert st.m_levels == ap_tree_12.m_levels
        assert state_to_doc(st) == state_to_doc(ap_tree_12)

    def test_schedule_log(self, ap_tree_12, tmp_path):
        path = tmp_path / "sched.jsonl"
        write_schedule_log(ap_tree_12, path)
        lines = [json.loads(x) for x in path.read_text().splitlines()]
        assert [rec["M_i"] for rec in lines] == [6, 11]
        assert lines[0]["tuple"] == ["00", "01", "10"]
        assert lines[0]["beta_i"] == 9
