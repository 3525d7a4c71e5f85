"""Print the hand-checkable fixture numbers: the two L0 matrices and the nine-target L1 game."""
from fractions import Fraction

from ssg_design import GameInstance, L0Budget, L1Budget, origami
from ssg_design.l0 import l0_greedy1, l0_greedy2, solve_l0
from ssg_design.l1 import greedy_lower_bound, solve_l1_bnb

MATRIX1 = GameInstance([1, 1, 10], [-1, -10, -10], [1, 10, 1], [-10, -10, -10], 1.0)
MATRIX2 = GameInstance([10, 1, 1], [-1.1, -1, -0.9], [1, 1, 1], [-1, -1, -1], 1.0)
NINE = GameInstance([10, 1] + [1] * 7, [-1] * 9, [2, 2] + [1.5] * 7, [-2, -2] + [-8.5] * 7, 1.0)


def main():
    b = L0Budget(2)
    for name, g in (("matrix 1", MATRIX1), ("matrix 2", MATRIX2)):
        print(f"{name}: no manipulation {origami(g).value:.4f}, exact {solve_l0(g, b).value:.4f}, "
              f"greedy1 {l0_greedy1(g, b).value:.4f}, greedy2 {l0_greedy2(g, b).value:.4f}")

    budget = L1Budget.uniform(1.0, 9)
    gm, manip = greedy_lower_bound(NINE, 0, budget)
    sse = origami(NINE.replace(reward_att=NINE.reward_att + manip.eps))
    cov = [str(Fraction(c).limit_denominator(100)) for c in sse.coverage]
    print(f"nine targets: greedy value {gm:.4f}, level {sse.attacker_value:.4f}, coverage {cov}")
    sol = solve_l1_bnb(NINE, budget, rel_gap=0.0)
    print(f"nine targets: branch-and-bound {sol.value:.4f} (bounds {sol.bound_certificate})")


if __name__ == "__main__":
    main()
