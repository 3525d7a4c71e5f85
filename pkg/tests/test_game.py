import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ssg_design import (GameInstance, PayoffDelta, apply_delta, attack_set, attack_set_coverage,
                        expected_utilities, origami, origami_bs, solve_manipulated)
from ssg_design.oracle import sse_value
from strategies import coverage_for, games


def one_target():
    return GameInstance([1], [-1], [1], [-1], 1.0)


class TestGameInstance:
    def test_sign_violation_rejected(self):
        with pytest.raises(ValueError):
            GameInstance([1], [1], [1], [-1])
        with pytest.raises(ValueError):
            GameInstance([1], [-1], [-1], [-1])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            GameInstance([1, 2], [-1], [1], [-1])

    def test_json_round_trip(self):
        g = GameInstance([1, 2], [-1, 0], [3, 4], [-5, -6], 1.5)
        g2 = GameInstance.from_dict(g.to_dict())
        assert g2.to_dict() == g.to_dict()

    def test_arrays_are_read_only(self):
        g = one_target()
        with pytest.raises(ValueError):
            g.reward_att[0] = 5


class TestExpectedUtilities:
    def test_zero_and_full_coverage(self):
        g = one_target()
        ud, ua = expected_utilities(g, [0.0])
        assert ud.tolist() == [-1] and ua.tolist() == [1]
        ud, ua = expected_utilities(g, [1.0])
        assert ud.tolist() == [1] and ua.tolist() == [-1]

    def test_two_target_hand_solution(self):
        g = GameInstance([1, 1], [-1, -1], [4, 2], [0, -2])
        _, ua = expected_utilities(g, [0.75, 0.25])
        np.testing.assert_allclose(ua, [1, 1])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            expected_utilities(one_target(), [0.1, 0.2])


class TestAttackSet:
    def _game_with_att(self, ua):
        # with zero coverage the attacker utility is just R^a
        n = len(ua)
        return GameInstance([0] * n, [0] * n, ua, [-1] * n), np.zeros(n)

    def test_strict_max_pair(self):
        g, c = self._game_with_att([1, 1, 0.5])
        assert attack_set(g, c, 1e-9) == (0, 1)

    def test_all_equal(self):
        g, c = self._game_with_att([2, 2, 2])
        assert attack_set(g, c, 1e-9) == (0, 1, 2)

    def test_tolerance_absorbs_rounding(self):
        g, c = self._game_with_att([1, 1 - 1e-12, 0])
        assert attack_set(g, c, 1e-9) == (0, 1)

    def test_negative_tol(self):
        g, c = self._game_with_att([1])
        with pytest.raises(ValueError):
            attack_set(g, c, -1)


class TestAttackSetCoverage:
    def test_symmetric(self):
        g = GameInstance([1, 1], [-1, -1], [1, 1], [-1, -1])
        M, c = attack_set_coverage(g, [0, 1], 1.0)
        assert M == pytest.approx(0) and c == pytest.approx([0.5, 0.5])

    def test_hand_solved(self):
        g = GameInstance([1, 1], [-1, -1], [4, 2], [0, -2])
        M, c = attack_set_coverage(g, [0, 1], 1.0)
        assert M == pytest.approx(1) and c == pytest.approx([0.75, 0.25])

    def test_singular(self):
        g = GameInstance([1], [-1], [0], [0])
        with pytest.raises(ValueError):
            attack_set_coverage(g, [0])

    def test_empty(self):
        with pytest.raises(ValueError):
            attack_set_coverage(one_target(), [])

    @given(games(min_n=2, max_n=6, integer=False))
    def test_round_trip(self, g):
        keep = [j for j in range(g.n) if g.reward_att[j] > g.penalty_att[j]]
        if not keep:
            return
        M, c = attack_set_coverage(g, keep)
        full = np.zeros(g.n)
        full[keep] = c
        _, ua = expected_utilities(g, full)
        np.testing.assert_allclose(ua[keep], M, atol=1e-9 * max(1, abs(M)))
        assert c.sum() == pytest.approx(g.resources)


class TestOrigami:
    def test_no_resources(self):
        g = GameInstance([1, 5], [-3, -2], [2, 7], [-1, -1], 0.0)
        for solve in (origami, origami_bs):
            s = solve(g)
            assert s.coverage.tolist() == [0, 0]
            assert s.attack_target == 1 and s.value == -2

    def test_symmetric(self):
        g = GameInstance([1] * 4, [-1] * 4, [3] * 4, [-2] * 4, 1.0)
        for solve in (origami, origami_bs):
            np.testing.assert_allclose(solve(g).coverage, 0.25)

    def test_matches_coverage_grid(self):
        g = GameInstance([1, 1, 10], [-1, -10, -10], [1, 10, 1], [-10, -10, -10], 1.0)
        # by hand: all three attacked at M = -70/51, c = (11/51, 29/51, 11/51)
        assert origami(g).value == pytest.approx(-29 / 51, abs=1e-12)
        N = 4000
        h = 1.0 / N
        tol = 20 * h            # attacker utilities move by at most 20 per unit of coverage
        c1 = np.arange(N + 1) * h
        best = -math.inf
        for c0 in np.arange(N + 1) * h:
            c2 = np.clip(1 - c0 - c1, 0, 1)
            ok = c0 + c1 <= 1 + 1e-12
            C = np.stack([np.full(ok.sum(), c0), c1[ok], c2[ok]], axis=1)
            ua = C * g.penalty_att + (1 - C) * g.reward_att
            ud = C * g.reward_def + (1 - C) * g.penalty_def
            att = ua >= ua.max(axis=1, keepdims=True) - tol
            best = max(best, np.where(att, ud, -np.inf).max())
        assert origami(g).value == pytest.approx(best, abs=1e-3)

    def test_single_target(self):
        g = GameInstance([2], [-2], [1], [-1], 0.5)
        s = origami_bs(g)
        assert s.attack_set == (0,) and s.coverage.tolist() == [0.5]

    def test_certainty_cap(self):
        # target 0 hits full coverage before resources run out; the attacker
        # level stops at its penalty
        g = GameInstance([1, 2], [-1, -1], [3, 1], [-1, -2], 5.0)
        for solve in (origami, origami_bs):
            s = solve(g)
            assert s.attacker_value == pytest.approx(-1)
            np.testing.assert_allclose(s.coverage, [1, 2 / 3])
            assert s.value == pytest.approx(1)

    @settings(max_examples=150)
    @given(games(max_n=8, integer=True))
    def test_sse_invariants(self, g):
        for solve in (origami, origami_bs):
            s = solve(g)
            c = s.coverage
            assert np.all(c >= 0) and np.all(c <= 1)
            assert c.sum() <= g.resources + 1e-9
            ud, ua = expected_utilities(g, c)
            M = s.attacker_value
            tol = 1e-6 * max(1, abs(M))
            gamma = list(s.attack_set)
            assert s.attack_target in gamma
            assert np.all(np.abs(ua[gamma] - M) <= tol)
            assert np.all(ua <= M + tol)
            assert s.value == pytest.approx(ud[gamma].max(), abs=1e-9)
            assert s.value == pytest.approx(ud[s.attack_target], abs=1e-12)

    @settings(max_examples=150)
    @given(games(max_n=8, integer=False))
    def test_bs_equals_origami(self, g):
        assert origami_bs(g).value == pytest.approx(origami(g).value, abs=1e-9)
        assert origami(g).attacker_value == pytest.approx(origami_bs(g).attacker_value, abs=1e-9)

    @settings(max_examples=100)
    @given(games(max_n=6, integer=False))
    def test_matches_bisection_oracle(self, g):
        assert origami_bs(g).value == pytest.approx(sse_value(g), abs=1e-7)

    @given(games(max_n=6, resources=0.0), st.lists(st.floats(0, 3), min_size=5, max_size=5))
    def test_resource_monotone(self, g, extra):
        prev = -math.inf
        r = 0.0
        for step in sorted(extra):
            r += step
            val = origami(g.replace(resources=r)).value
            assert val >= prev - 1e-9
            prev = val


class TestApplyDelta:
    def test_identity(self):
        g = GameInstance([1, 2], [-1, -2], [3, 4], [-5, -6])
        sub, keep = apply_delta(g, PayoffDelta.zeros(2))
        assert sub.to_dict() == g.to_dict() and keep.tolist() == [0, 1]

    def test_reward_increase(self):
        g = GameInstance([1, 2], [-1, -2], [3, 4], [-5, -6])
        sub, _ = apply_delta(g, PayoffDelta([1.0, 0], [0, 0]))
        assert sub.reward_att.tolist() == [4, 4]

    def test_sign_violation(self):
        g = GameInstance([1], [-1], [1], [-1])
        with pytest.raises(ValueError):
            apply_delta(g, PayoffDelta([-2.0], [0.0]))
        with pytest.raises(ValueError):
            apply_delta(g, PayoffDelta([0.0], [2.0]))

    def test_cannot_remove_everything(self):
        g = GameInstance([1], [-1], [1], [-1])
        with pytest.raises(ValueError):
            apply_delta(g, PayoffDelta([0.0], [0.0], [True]))

    @settings(max_examples=60)
    @given(games(min_n=2, max_n=6), st.data())
    def test_removal_matches_huge_penalty(self, g, data):
        # a huge penalty leaves j attackable with near-zero coverage; a very
        # bad defender penalty keeps the tie-break from ever picking it
        assume(g.resources > 0)     # with no coverage the penalty is irrelevant
        j = data.draw(st.integers(0, g.n - 1))
        Pd = g.penalty_def.copy()
        Pd[j] = -1e3
        g = g.replace(penalty_def=Pd)
        removed = np.zeros(g.n, dtype=bool)
        removed[j] = True
        via_removal = solve_manipulated(g, PayoffDelta(np.zeros(g.n), np.zeros(g.n), removed))
        Pa = g.penalty_att.copy()
        Pa[j] = -1e9
        via_sentinel = origami(g.replace(penalty_att=Pa))
        assert via_removal.value == pytest.approx(via_sentinel.value, abs=1e-6)
        assert via_removal.coverage[j] == 0


@given(games(max_n=5), st.lists(st.floats(0, 1), min_size=5, max_size=5))
def test_attack_set_nonempty(g, fracs):
    c = coverage_for(g, fracs[: g.n])
    assert len(attack_set(g, c, 1e-9)) >= 1
