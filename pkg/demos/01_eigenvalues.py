"""First eigenvalues of the anisotropic p-Laplacian.

For p = 2 and A = I on the unit square the first Dirichlet eigenvalue is
2 pi^2.  The descent on the nonlinear Rayleigh quotient recovers it, and the
same code handles p != 2, where no closed form exists and only refinement
tells us how accurate a value is.  The last part checks that a vector
eigenvalue weighted by F is the scalar one divided by M_F = max F on the unit
p-sphere.
"""

import numpy as np

from critlap import fields, homog, spectra
from critlap.grid import DomainSpec, build_domain


def square(h):
    return build_domain(DomainSpec("box", h, {"lo": [0.0, 0.0], "hi": [1.0, 1.0]}))


I2 = fields.constant(np.eye(2))

print("p = 2, unit square")
for h in (1 / 16, 1 / 32, 1 / 64, 1 / 128):
    lam = spectra.lambda1(I2, 2.0, square(h), restarts=1).value
    print(f"  h = 1/{round(1 / h):<4d} lambda1 = {lam:.6f}   2 pi^2 = {2 * np.pi**2:.6f}")

print("p = 1.5, unit square (no closed form)")
for h in (1 / 16, 1 / 32, 1 / 64):
    r = spectra.lambda1(I2, 1.5, square(h), restarts=1)
    print(f"  h = 1/{round(1 / h):<4d} lambda1 = {r.value:.6f}   stop: {r.method['stop']}")

disk = build_domain(DomainSpec("ball", 1 / 32, {"center": [0.0, 0.0], "radius": 1.0}))
A = fields.shifted_power(np.diag([1.0, 2.0]), 1.0, 2.0, [0.0, 0.0])
p = 1.5
F = homog.power_sum([2.0, -1.0], p)
lam = spectra.lambda1(A, p, disk, restarts=3).value
lamF = spectra.lambda1F(A, p, F, disk, restarts=3).value
MF = homog.extrema_on_p_sphere(F, p).M
print("A = diag(1, 2) + |x|^2 I on the disk, p = 1.5, F = 2|s1|^p - |s2|^p")
print(f"  lambda1 = {lam:.8f}, M_F = {MF:.6f}, M_F * lambda1F = {MF * lamF:.8f}")
