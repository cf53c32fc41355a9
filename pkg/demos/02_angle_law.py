"""A time-like surface in the Robertson-Walker space-time with f(t) = t + 2.

The angle between the surface and the comoving observer changes with t, but
sinh(theta) f(t) stays fixed at the construction constant a.
"""
import math

from rwprn import FamilySpec, SurfaceGeometry, WarpingFunction, construct, relative_nullity_dim
from rwprn.ode import CoefficientFunction as CF

f = WarpingFunction.polynomial([2.0, 1.0], interval=(-1.0, 1.0))
spec = FamilySpec("TimelikeRW0", f=f, a=1.0, a1=CF.constant(1), a2=CF.constant(1),
                  phi1=CF.constant(1), phi2_0=1.0, u0=-1.0, v0=1.0, u_range=(-0.99, 0.99))
geo = SurfaceGeometry(f, 0, construct(spec), spec.orientation)

print(f"{'t':>6} {'theta':>10} {'sinh(theta) f':>14} {'nullity':>8}")
for u in (-0.8, -0.4, 0.0, 0.4, 0.8):
    fo = geo.forms(u, 0.5)
    t = fo.frame.p[0]
    print(f"{t:6.2f} {fo.frame.theta:10.6f} {math.sinh(fo.frame.theta) * f(t):14.10f}"
          f" {relative_nullity_dim(fo):8d}")
