"""Walk along a u-line of a space-like surface in E^1_1 x S^3 and compare the
numerically extracted second fundamental form with its closed form."""
import math

from rwprn import FamilySpec, SurfaceGeometry, construct, predicted_invariants
from rwprn.ode import CoefficientFunction as CF

spec = FamilySpec("SpacelikeS3", theta0=math.acosh(1.25),
                  a1=CF.constant(1), a2=CF.constant(0), a3=CF.constant(1))
geo = SurfaceGeometry(spec.f, spec.c, construct(spec), spec.orientation)

print(f"{'u':>6} {'|omega|':>11} {'pred':>11} {'|h3_22|':>11} {'pred':>11} {'|h4_22|':>11} {'pred':>11}")
for u in (-0.9, -0.5, -0.1, 0.3, 0.7):
    fo = geo.forms(u, 0.5)
    w, h3, h4 = predicted_invariants(spec, u, 0.5)
    print(f"{u:6.2f} {abs(fo.omega):11.8f} {abs(w):11.8f} {abs(fo.h3_22):11.8f} {abs(h3):11.8f}"
          f" {abs(fo.h4_22):11.8f} {abs(h4):11.8f}")

# e1 spans the relative null space: h(e1, .) vanishes identically
fo = geo.forms(0.2, 0.5)
print("\n|h(e1,e1)| =", f"{fo.h_norm(1, 1):.2e}", " |h(e1,e2)| =", f"{fo.h_norm(1, 2):.2e}",
      " |h(e2,e2)| =", f"{fo.h_norm(2, 2):.4f}")
print("angle theta =", f"{fo.frame.theta:.10f}", " vs theta0 =", f"{spec.theta0:.10f}")
