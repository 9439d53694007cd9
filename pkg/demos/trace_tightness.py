"""Trace inequality for f = 1 on the unit ball in R^3: the relative slack
vanishes as epsilon grows, so the constants cannot be lowered."""
import numpy as np

from gaffkorn import make_domain, norms
from gaffkorn.fields import ScalarPoly, scalar_field
from gaffkorn.inequalities import trace_inequality

ball = make_domain("ball", r=1.0, n=3)
nrm = norms(scalar_field(ScalarPoly.const(3), "one"), ball)
for eps in np.logspace(-2, 8, 11):
    lhs, rhs = trace_inequality(nrm, ball, None, eps)
    print(f"eps={eps:9.2e}  lhs={lhs:.6f}  rhs={rhs:.6f}  slack/rhs={(rhs - lhs) / rhs:.3e}")
