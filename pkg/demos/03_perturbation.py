"""Bend a surface off its family by eps sin(u) e4 and watch relative nullity break.

The residual (|h(e1,e1)| + |h(e1,e2)|) / |h(e2,e2)| grows linearly with eps.
"""
import math

from rwprn import FamilySpec, construct, make_grid
from rwprn.ode import CoefficientFunction as CF
from rwprn.verify import check_prn

spec = FamilySpec("SpacelikeS3", theta0=math.acosh(1.25),
                  a1=CF.constant(1), a2=CF.constant(0), a3=CF.constant(1))
grid = make_grid(spec.u_range, spec.v_range, 9, 9)

for eps in (0.0, 1e-4, 1e-3, 1e-2, 5e-2):
    res = check_prn(spec.f, spec.c, construct(spec, perturb=eps), grid)
    hist = res.details["nullity_histogram"]
    print(f"eps = {eps:7.0e}   residual {res.max_residual:9.2e}   nullity histogram {hist}")
