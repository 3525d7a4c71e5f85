import csv
import json
from collections import Counter

import pytest

from conftest import DATA
from ssg_design import L0Budget, L1Budget, LInfBudget
from ssg_design.bench import (CSV_HEADER, ExperimentConfig, Xoshiro256, gen_instance,
                              load_instance, read_results, relative_gap_to, run_experiment,
                              save_instance)


class TestPrng:
    def test_splitmix_seeding(self):
        # first splitmix64 output for seed 0 is a published constant
        assert Xoshiro256(0).s[0] == 0xE220A8397B1DCDAF

    def test_stream_repeats(self):
        a, b = Xoshiro256(99), Xoshiro256(99)
        assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]

    def test_seed_changes_stream(self):
        assert Xoshiro256(1).next_u64() != Xoshiro256(2).next_u64()

    def test_integer_range(self):
        rng = Xoshiro256(5)
        xs = rng.integers(-3, 3, 500)
        assert min(xs) == -3 and max(xs) == 3
        with pytest.raises(ValueError):
            rng.integer(2, 1)

    def test_uniform_frequencies(self):
        # 1000 draws over ten values: each frequency within 0.1 +- 0.03
        rng = Xoshiro256(11)
        counts = Counter(rng.integer(1, 10) for _ in range(1000))
        assert set(counts) == set(range(1, 11))
        for v in range(1, 11):
            assert abs(counts[v] / 1000 - 0.1) <= 0.03
        chi2 = sum((counts[v] - 100) ** 2 / 100 for v in range(1, 11))
        assert chi2 < 27.88      # p = 0.001 with 9 degrees of freedom


class TestGenInstance:
    def test_deterministic(self):
        for norm in ("l1", "l0", "linf"):
            a = gen_instance(7, 42, norm)
            b = gen_instance(7, 42, norm)
            assert a[0].to_dict() == b[0].to_dict()
            assert a[1].to_dict() == b[1].to_dict()

    def test_bounds_n5(self):
        for seed in range(30):
            g, b = gen_instance(5, seed, "l1")
            for arr in (g.reward_def, g.reward_att):
                assert arr.min() >= 1 and arr.max() <= 10
            for arr in (g.penalty_def, g.penalty_att):
                assert arr.min() >= -10 and arr.max() <= -1
            assert 1 <= b.B <= 20
            assert b.mu.min() >= 1 and b.mu.max() <= 20
            assert b.theta.min() >= 1 and b.theta.max() <= 20

    def test_budget_kinds(self):
        assert isinstance(gen_instance(6, 0, "l1")[1], L1Budget)
        l0 = gen_instance(7, 0, "l0")[1]
        assert isinstance(l0, L0Budget) and l0.B == 3
        linf = gen_instance(4, 0, "linf")[1]
        assert isinstance(linf, LInfBudget)
        assert linf.Br.min() >= 1 and linf.Bp.max() <= 16

    def test_same_game_across_norms(self):
        # the payoffs are drawn first, so the norm only changes the budget
        assert gen_instance(5, 3, "l1")[0].to_dict() == gen_instance(5, 3, "linf")[0].to_dict()

    def test_errors(self):
        with pytest.raises(ValueError):
            gen_instance(0, 1, "l1")
        with pytest.raises(ValueError):
            gen_instance(3, 1, "l2")

    def test_file_round_trip(self, tmp_path):
        g, b = gen_instance(4, 9, "linf", resources=0.5)
        p = tmp_path / "g.json"
        save_instance(p, g, {"linf": b})
        g2, b2 = load_instance(p, "linf")
        assert g2.to_dict() == g.to_dict() and b2.to_dict() == b.to_dict()
        with pytest.raises(ValueError):
            load_instance(p, "l1")


class TestConfig:
    def test_defaults_and_validation(self):
        cfg = ExperimentConfig(norm="l0", sizes=[5])
        assert cfg.algorithms == ["l0", "greedy1", "greedy2", "milp"]
        assert cfg.reference == "l0"
        with pytest.raises(ValueError):
            ExperimentConfig(norm="l0", sizes=[5], trials=0)
        with pytest.raises(ValueError):
            ExperimentConfig(norm="l0", sizes=[5], algorithms=["l0"], reference="milp")
        with pytest.raises(ValueError):
            ExperimentConfig(norm="l3", sizes=[5])

    def test_resource_rule(self):
        assert ExperimentConfig(norm="l0", sizes=[5], resources="n/10").resources_for(30) == 3
        assert ExperimentConfig(norm="l0", sizes=[5], resources=2).resources_for(30) == 2

    def test_seed_determines_instances(self):
        a = ExperimentConfig(norm="l0", sizes=[5], trials=3, seed=4)
        b = ExperimentConfig(norm="l0", sizes=[5], trials=3, seed=4)
        assert [a.trial_seed(5, t) for t in range(3)] == [b.trial_seed(5, t) for t in range(3)]
        c = ExperimentConfig(norm="l0", sizes=[5], trials=3, seed=5)
        assert a.trial_seed(5, 0) != c.trial_seed(5, 0)

    def test_from_file_resolves_paths(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"norm": "l0", "sizes": [], "instances": ["m.json"],
                                 "output": "out/r.csv"}))
        cfg = ExperimentConfig.from_file(p)
        assert cfg.instances == [str(tmp_path / "m.json")]
        assert cfg.output == str(tmp_path / "out" / "r.csv")


def test_relative_gap():
    assert relative_gap_to(9.0, 10.0) == pytest.approx(-0.1)
    assert relative_gap_to(-2.0, -4.0) == pytest.approx(0.5)
    assert relative_gap_to(1.0 + 1e-14, 1.0) == 0.0
    assert relative_gap_to(0.5, 0.0) == 0.5


class TestRunExperiment:
    def test_l0_row_count_and_reference_gap(self, tmp_path):
        cfg = ExperimentConfig(norm="l0", sizes=[10, 20], trials=5, seed=1,
                               algorithms=["solve_l0", "l0_greedy1", "l0_greedy2", "l0_milp"],
                               reference="solve_l0", resources="n/10", budget_rule="half",
                               node_limit=30)     # the MILP is a baseline; cap it
        out = tmp_path / "r.csv"
        rows = run_experiment(cfg, out)
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert len(lines) == 41 and len(rows) == 40
        for r in rows:
            assert r["status"] == "optimal" or not r["status"].startswith("error")
            if r["algorithm"] == "solve_l0":
                assert r["gap"] == 0.0
            else:
                assert r["gap"] <= 1e-9     # nothing beats the exact solver

    def test_fixture_gaps(self, tmp_path):
        cfg = ExperimentConfig(norm="l0", sizes=[], algorithms=["l0", "greedy1", "greedy2"],
                               instances=[str(DATA / "matrix1.json"), str(DATA / "matrix2.json")])
        rows = run_experiment(cfg, tmp_path / "fix.csv")
        by = {(r["trial"], r["algorithm"]): r for r in rows}
        assert by[0, "l0"]["value"] == 10 and by[1, "l0"]["value"] == pytest.approx(10)
        assert by[0, "greedy1"]["gap"] == pytest.approx((0.476 - 10) / 10, abs=1e-3)
        assert by[1, "greedy2"]["gap"] <= (1 - 10) / 10 + 1e-9
        assert all(r["seed"] == -1 for r in rows)

    def test_failure_is_a_row(self, tmp_path, monkeypatch):
        import ssg_design.bench as bench

        real = bench.run_algorithm

        def flaky(norm, alg, *a, **k):
            if alg == "greedy1":
                raise RuntimeError("boom")
            return real(norm, alg, *a, **k)

        monkeypatch.setattr(bench, "run_algorithm", flaky)
        cfg = ExperimentConfig(norm="l0", sizes=[4], trials=2, algorithms=["l0", "greedy1"])
        rows = run_experiment(cfg, tmp_path / "f.csv")
        assert len(rows) == 4
        bad = [r for r in rows if r["algorithm"] == "greedy1"]
        assert all(r["status"] == "error: RuntimeError: boom" and r["value"] is None for r in bad)
        assert read_results(tmp_path / "f.csv")[1]["value"] is None

    def test_lossless_parse(self, tmp_path):
        cfg = ExperimentConfig(norm="l1", sizes=[3], trials=2, seed=2,
                               algorithms=["greedy", "ptas"], eta=0.1)
        out = tmp_path / "l1.csv"
        rows = run_experiment(cfg, out)
        back = read_results(out)
        assert len(back) == len(rows)
        for a, b in zip(rows, back):
            for k in CSV_HEADER:
                if k == "wall_ms":
                    assert b[k] == pytest.approx(a[k])
                else:
                    assert b[k] == a[k], k

    def test_partial_results_flushed(self, tmp_path, monkeypatch):
        import ssg_design.bench as bench

        out = tmp_path / "p.csv"
        seen = []
        real = bench.run_algorithm

        def spy(*a, **k):
            with open(out) as fh:
                seen.append(sum(1 for _ in csv.reader(fh)))
            return real(*a, **k)

        monkeypatch.setattr(bench, "run_algorithm", spy)
        run_experiment(ExperimentConfig(norm="linf", sizes=[3], trials=3), out)
        assert seen == [1, 2, 3]

    def test_replay_byte_identical(self, tmp_path):
        cfg = ExperimentConfig(norm="linf", sizes=[3, 5], trials=3, seed=8)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_experiment(cfg, a)
        run_experiment(cfg, b)

        def cols(p):
            with open(p) as fh:
                return [(r["value"], r["gap"]) for r in csv.DictReader(fh)]

        assert cols(a) == cols(b)
