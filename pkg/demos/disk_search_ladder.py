"""Lower bounds for the optimal constants on the unit disk from polynomial
trial spaces of increasing degree, next to the proven upper bound."""
from gaffkorn import estimate_constant, make_domain

disk = make_domain("ball", r=1.0, n=2)
for bc in ("tangent", "normal"):
    for kind in ("gaffney", "korn"):
        rep = estimate_constant(disk, bc, kind, (1, 2, 3, 4, 5, 6))
        vals = ", ".join(f"{v:.6f}" for v in rep.values)
        print(f"{bc:>7} {kind:>7}: [{vals}]  upper bound {rep.values[-1] + rep.gap:.6f}")
