"""Conjunctive combination and the exact joint mass oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belnet import (
    Frame,
    JointMass,
    SizeGuardError,
    conjunctive_combine,
    cylindrical_extension,
    network_joint,
    parse_subset_label,
)

from conftest import bframe, load, root_table

FRAMES2 = (Frame("X1", ("a", "b")), Frame("X2", ("a", "b")))


def _entry(joint, net, *lits):
    masks = tuple(
        parse_subset_label(l, net.frame(v)) for l, v in zip(lits, net.variables)
    )
    return joint.get(masks)


class TestCylindricalExtension:
    def test_root_extends_with_full_sets(self):
        root = root_table(FRAMES2[0])
        j = cylindrical_extension(root, FRAMES2)
        a = parse_subset_label("{a}", FRAMES2[0])
        full2 = parse_subset_label("{a,b}", FRAMES2[1])
        assert j.get((a, full2)) == pytest.approx(0.4)

    def test_extension_to_own_scope_is_identity(self, loose_cond):
        frames = (loose_cond.parent_frames[0], loose_cond.child_frame)
        j = cylindrical_extension(loose_cond, frames)
        for cfg, child, v in loose_cond.items():
            assert j.get((cfg[0], child)) == pytest.approx(v, abs=1e-15)

    def test_total_mass_unchanged(self, loose_cond):
        frames = (loose_cond.parent_frames[0], loose_cond.child_frame, Frame("X3", ("a", "b")))
        j = cylindrical_extension(loose_cond, frames)
        assert j.total() == pytest.approx(loose_cond.values.sum(), abs=1e-12)

    def test_missing_variable_rejected(self, loose_cond):
        with pytest.raises(ValueError, match="missing table variable"):
            cylindrical_extension(loose_cond, (loose_cond.child_frame,))


class TestConjunctiveCombine:
    def _pair(self, loose_cond):
        root = root_table(Frame("X1", ("a", "b")))
        frames = (Frame("X1", ("a", "b")), loose_cond.child_frame)
        # rebuild conditional against the same parent frame object semantics
        return (
            cylindrical_extension(root, frames),
            cylindrical_extension(loose_cond, frames),
        )

    def test_hand_expanded_entry(self, loose_cond):
        p, q = self._pair(loose_cond)
        j = conjunctive_combine(p, q)
        # three contributing pairs: 0.4*(-1/12) + 0.2*(-1/12) + 0.4*0.35
        a = parse_subset_label("{a}", p.frames[0])
        b = parse_subset_label("{b}", p.frames[1])
        assert j.get((a, b)) == pytest.approx(0.09, abs=1e-9)

    def test_bruteforce_all_pairs(self, loose_cond):
        p, q = self._pair(loose_cond)
        j = conjunctive_combine(p, q)
        expect = {}
        empty = 0.0
        for fa, va in p.entries.items():
            for fb, vb in q.entries.items():
                inter = tuple(x & y for x, y in zip(fa, fb))
                if 0 in inter:
                    empty += va * vb
                else:
                    expect[inter] = expect.get(inter, 0.0) + va * vb
        assert set(expect) == set(j.entries)
        for k, v in expect.items():
            assert j.entries[k] == pytest.approx(v, abs=1e-15)

    def test_vacuous_is_neutral(self, loose_cond):
        p, q = self._pair(loose_cond)
        vac = JointMass.vacuous(p.frames)
        j = conjunctive_combine(vac, q)
        assert j.entries == pytest.approx(q.entries)
        assert j.empty_mass == 0.0

    def test_commutative(self, loose_cond):
        p, q = self._pair(loose_cond)
        ab = conjunctive_combine(p, q)
        ba = conjunctive_combine(q, p)
        assert set(ab.entries) == set(ba.entries)
        for k in ab.entries:
            assert abs(ab.entries[k] - ba.entries[k]) <= 1e-12

    def test_scope_mismatch(self, loose_cond):
        p, _ = self._pair(loose_cond)
        other = JointMass.vacuous((Frame("Y1", ("a", "b")), Frame("Y2", ("a", "b"))))
        with pytest.raises(ValueError, match="scope mismatch"):
            conjunctive_combine(p, other)

    def test_pair_guard(self):
        frames = FRAMES2
        big = JointMass(frames, {(1, i): 0.0 for i in range(1, 3200)})
        big2 = JointMass(frames, {(2, i): 0.0 for i in range(1, 3200)})
        with pytest.raises(SizeGuardError, match="focal pairs"):
            conjunctive_combine(big, big2)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_algebraic_properties_on_random_tables(seed):
    rng = np.random.default_rng(seed)
    frames = (Frame("A", ("a", "b")), Frame("B", ("a", "b")))
    keys = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]

    def rand_joint():
        vals = rng.uniform(-1, 1, size=9)
        return JointMass(frames, dict(zip(keys, vals)), float(rng.uniform(0, 0.2)))

    p, q, r = rand_joint(), rand_joint(), rand_joint()
    pq = conjunctive_combine(p, q)
    qp = conjunctive_combine(q, p)
    for k in set(pq.entries) | set(qp.entries):
        assert abs(pq.entries.get(k, 0.0) - qp.entries.get(k, 0.0)) <= 1e-12
    left = conjunctive_combine(pq, r)
    right = conjunctive_combine(p, conjunctive_combine(q, r))
    for k in set(left.entries) | set(right.entries):
        assert abs(left.entries.get(k, 0.0) - right.entries.get(k, 0.0)) <= 1e-12
    assert left.total() == pytest.approx(p.total() * q.total() * r.total(), abs=1e-12)
    assert pq.total() == pytest.approx(p.total() * q.total(), abs=1e-12)


class TestNetworkJoint:
    def test_chain4_negative_exhibit(self):
        net = load("chain4_negjoint.dsn")
        joint, report = network_joint(net)
        assert _entry(joint, net, "{a}", "{b}", "{a}", "{a}") == pytest.approx(
            9.40444e-05, rel=1e-4
        )
        assert _entry(joint, net, "{a}", "{b}", "{a}", "{b}") == pytest.approx(
            -2.91556e-05, rel=1e-4
        )
        assert _entry(joint, net, "{a}", "{b}", "{a}", "{a,b}") == pytest.approx(
            -3.82222e-05, rel=1e-4
        )
        assert not report.proper
        assert report.total_nonempty == pytest.approx(1.0, abs=1e-6)

    def test_star5_negative_exhibit(self):
        net = load("star5_negjoint.dsn")
        joint, report = network_joint(net)
        assert _entry(joint, net, "{a}", "{b}", "{b}", "{a,b}", "{a}") == pytest.approx(
            0.0022038, rel=1e-4
        )
        assert _entry(joint, net, "{a}", "{b}", "{b}", "{b}", "{a,b}") == pytest.approx(
            -0.000107315, rel=1e-4
        )
        assert _entry(joint, net, "{a}", "{b}", "{b}", "{a,b}", "{b}") == pytest.approx(
            -0.000107315, rel=1e-4
        )
        assert not report.proper

    @pytest.mark.parametrize("fixture", ["chain3_proper.dsn", "star4_proper.dsn"])
    def test_proper_compositions(self, fixture):
        joint, report = network_joint(load(fixture))
        assert report.proper
        assert min(joint.entries.values()) >= -1e-12

    def test_empty_mass_measured_not_assumed(self):
        for fixture in ("chain4_negjoint.dsn", "star5_negjoint.dsn"):
            _, report = network_joint(load(fixture))
            assert abs(report.empty_mass) < 1e-12

    def test_commonality_tables_are_converted(self):
        joint, report = network_joint(load("chain3_ternary.dsn"))
        assert report.total_nonempty == pytest.approx(1.0, abs=1e-9)

    def test_scope_guard(self):
        lines = [f"var X{i} : a b" for i in range(7)]
        lines += [
            f"table X{i} | kind=m\n  {{a,b}} : 1\nend" for i in range(7)
        ]
        from belnet import parse_network

        with pytest.raises(SizeGuardError, match="at most 6"):
            network_joint(parse_network("\n".join(lines)))
