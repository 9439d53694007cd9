"""The rotation x -> (-x2, x1, 0, ...) on balls: reach/gradient ratio n+2 and
Korn quotient n+3 in every dimension and radius."""
from gaffkorn import ball_killing_case, constant_c1

print(f"{'n':>2} {'r':>4} {'ratio':>8} {'korn':>8} {'C1(n)':>8}")
for n in range(2, 7):
    for r in (0.5, 1.0, 2.0):
        v = ball_killing_case(n, r).evaluate()
        print(f"{n:>2} {r:>4} {v['reach_grad_ratio']:>8.5f} {v['korn_quotient']:>8.5f} {constant_c1(n):>8.4f}")
