import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_game
from ssg_design import GameInstance, L0Budget, origami, solve_manipulated
from ssg_design.kernel import solve_milp
from ssg_design.l0 import (build_l0_milp, l0_greedy1, l0_greedy2, max_avg_subset, solve_l0,
                           solve_l0_milp)
from ssg_design.oracle import l0_enum_oracle
from strategies import games


class TestMaxAvgSubset:
    def test_unweighted(self):
        sub, avg = max_avg_subset([1, 3, 2], [1, 1, 1], 2)
        assert sorted(sub) == [1, 2] and avg == pytest.approx(2.5)

    def test_ratio(self):
        sub, avg = max_avg_subset([4, 1], [2, 1], 1)
        assert list(sub) == [0] and avg == pytest.approx(2)

    def test_keep_out_of_range(self):
        with pytest.raises(ValueError):
            max_avg_subset([1, 2], [1, 1], 3)
        with pytest.raises(ValueError):
            max_avg_subset([1, 2], [1, 1], 0)

    def test_nonpositive_weight(self):
        with pytest.raises(ValueError):
            max_avg_subset([1, 2], [1, 0], 1)

    @settings(max_examples=80)
    @given(st.lists(st.floats(-10, 10), min_size=8, max_size=8),
           st.lists(st.floats(0.1, 5), min_size=8, max_size=8), st.integers(1, 8))
    def test_matches_enumeration(self, v, w, keep):
        v, w = np.array(v), np.array(w)
        best = max(v[list(s)].sum() / w[list(s)].sum() for s in itertools.combinations(range(8), keep))
        sub, avg = max_avg_subset(v, w, keep)
        assert len(sub) == keep
        assert avg == pytest.approx(best, abs=1e-9)
        assert v[list(sub)].sum() / w[list(sub)].sum() == pytest.approx(best, abs=1e-9)


class TestFixtures:
    def test_matrix1(self, matrix1):
        sol = solve_l0(matrix1, L0Budget(2))
        assert sol.value == 10
        assert sorted(np.flatnonzero(sol.delta.removed)) == [0, 1]

    def test_matrix2(self, matrix2):
        sol = solve_l0(matrix2, L0Budget(2))
        assert sol.value == pytest.approx(10)
        assert sorted(np.flatnonzero(sol.delta.removed)) == [1, 2]

    def test_greedy1_matrix1(self, matrix1):
        assert l0_greedy1(matrix1, L0Budget(2)).value == pytest.approx(0.476, abs=0.01)

    def test_greedy2_matrix2(self, matrix2):
        sol = l0_greedy2(matrix2, L0Budget(2))
        assert sol.value <= 1 + 1e-9
        assert sol.delta.removed[0]

    def test_milp_matrix1(self, matrix1):
        res = solve_milp(build_l0_milp(matrix1, L0Budget(2)))
        assert res.objective == pytest.approx(10)


class TestZeroBudget:
    @pytest.mark.parametrize("solver", [solve_l0, l0_greedy1, l0_greedy2, solve_l0_milp])
    def test_equals_origami(self, solver, rng):
        for _ in range(5):
            g = random_game(rng, 5)
            assert solver(g, L0Budget(0)).value == pytest.approx(origami(g).value, abs=1e-6)


class TestExactness:
    def test_against_oracle_and_milp(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 7))
            g = random_game(rng, n, r=float(rng.choice([1.0, 0.5, 2.0])), zero_ok=True)
            b = L0Budget(int(rng.integers(0, n // 2 + 1)))
            want, _ = l0_enum_oracle(g, b)
            assert solve_l0(g, b).value == pytest.approx(want, abs=1e-6)
            assert solve_l0_milp(g, b).value == pytest.approx(want, abs=1e-6)

    @settings(max_examples=60, deadline=None)
    @given(games(min_n=1, max_n=6), st.data())
    def test_property_against_oracle(self, g, data):
        b = L0Budget(data.draw(st.integers(0, g.n)))
        want, _ = l0_enum_oracle(g, b)
        sol = solve_l0(g, b)
        assert sol.value == pytest.approx(want, abs=1e-6)

    @settings(max_examples=60, deadline=None)
    @given(games(min_n=1, max_n=6), st.data())
    def test_witness_shape(self, g, data):
        b = L0Budget(data.draw(st.integers(0, g.n)))
        sol = solve_l0(g, b)
        d = sol.delta
        assert not d.eps.any()
        zeroed = np.flatnonzero((d.delta != 0) & ~d.removed)
        assert len(zeroed) <= 1
        for t in zeroed:
            assert g.penalty_att[t] + d.delta[t] == 0
            assert t == sol.sse.attack_target
        assert b.cost(d) <= b.B
        assert solve_manipulated(g, d).value == pytest.approx(sol.value)

    @settings(max_examples=40, deadline=None)
    @given(games(min_n=2, max_n=7))
    def test_monotone_in_budget(self, g):
        vals = [solve_l0(g, L0Budget(B)).value for B in range(g.n + 1)]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    @settings(max_examples=40, deadline=None)
    @given(games(min_n=1, max_n=6), st.data())
    def test_greedies_dominated(self, g, data):
        b = L0Budget(data.draw(st.integers(0, g.n)))
        best = solve_l0(g, b).value
        assert l0_greedy1(g, b).value <= best + 1e-9
        assert l0_greedy2(g, b).value <= best + 1e-9


def test_cubic_scaling():
    def timed(n):
        rng = np.random.default_rng(n)
        g = random_game(rng, n, r=n / 10)
        t0 = time.perf_counter()
        solve_l0(g, L0Budget(n // 2))
        return time.perf_counter() - t0

    t50 = min(timed(50) for _ in range(2))
    t100 = min(timed(100) for _ in range(2))
    assert t100 / t50 <= 10
