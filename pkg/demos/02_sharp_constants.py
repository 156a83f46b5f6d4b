"""Sharp Sobolev constants and the algebra built on them.

The constant S is computed by radial quadrature at the extremal profile and
compared with Talenti's closed form.  For an anisotropic coefficient the
threshold N(A;G) combines S with the smallest determinant of A and the
maximum of G on the unit p-sphere.
"""

import math

import numpy as np

from critlap import bubbles, fields, homog
from critlap.grid import DomainSpec, build_domain


def talenti(n, p):
    C = (
        math.pi ** -0.5
        * n ** (-1 / p)
        * ((p - 1) / (n - p)) ** (1 - 1 / p)
        * (math.gamma(1 + n / 2) * math.gamma(n) / (math.gamma(n / p) * math.gamma(1 + n - n / p))) ** (1 / n)
    )
    return C**p


print(f"{'n':>3} {'p':>5} {'S (quadrature)':>20} {'S (Talenti)':>20} {'c_np':>12}")
for n, p in ((3, 2.0), (4, 2.0), (3, 1.5), (5, 2.5)):
    print(f"{n:3d} {p:5.2f} {bubbles.sobolev_constant(n, p):20.15f} {talenti(n, p):20.15f} {bubbles.normalize_bubble(n, p):12.8f}")

n, p = 3, 1.5
M = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 3.0]])
A = fields.shifted_power(M, 1.0, 2.0, [0.0, 0.0, 0.0])
G = homog.power_sum([1.0, 2.0], n * p / (n - p))
dom = build_domain(DomainSpec("box", 0.125, {"lo": [-1.0] * 3, "hi": [1.0] * 3}))
tab = bubbles.constant_algebra(n, p, M=M, G=G, A=A, dom=dom)
print("\nA = M + |x|^2 I, G = |s1|^3 + 2|s2|^3, n = 3, p = 1.5")
for k, v in tab.as_dict().items():
    print(f"  {k:>22} = {v}")
