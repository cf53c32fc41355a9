"""Which Robertson-Walker ambients admit the construction?

The families need f''/f - (f'^2 + c)/f^2 to be nonzero.  Flat space written
as e^t over E^3 or as t + 2 over H^3 (a Milne-type chart), and de Sitter
space as cosh t over S^3, fail everywhere; 1 + t^2 fails only at t = 1.
The Einstein static universe (f = 1, c = 1) passes.
"""
from rwprn import WarpingFunction
from rwprn.verify import ambient_check

cases = {
    "e^t over E^3": (WarpingFunction.exponential(interval=(-2, 2)), 0),
    "cosh t over S^3": (WarpingFunction.cosh(interval=(-2, 2)), 1),
    "1 + t^2 over E^3": (WarpingFunction.polynomial([1.0, 0.0, 1.0], interval=(0.0, 2.0)), 0),
    "t + 2 over H^3": (WarpingFunction.polynomial([2.0, 1.0], interval=(-1.5, 1.5)), -1),
    "1 over S^3": (WarpingFunction.constant(1.0), 1),
}
for name, (f, c) in cases.items():
    scan = ambient_check(f, c, n=400)
    zeros = ", ".join(f"{t:.6g}" for t in scan["zero_set"][:3])
    where = f"  [t = {zeros}]" if "somewhere" in scan["status"] else ""
    print(f"{name:18s} {scan['status']}{where}")
