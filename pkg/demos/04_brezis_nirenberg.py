"""The critical problem on the unit ball in three dimensions.

With lambda = 0.8 lambda1 the constrained minimiser beats the Sobolev
threshold, so the certificate reports existence and the minimiser rescales
into a discrete solution whose Pohozaev residual is small.  With lambda = 0
the best quotient stays at the threshold and the verdict is inconclusive.
A coarse grid keeps this to a few seconds; the reproduction suite uses
h = 1/32.
"""

import numpy as np

from critlap import bubbles, fields, homog, pohozaev, solve, spectra
from critlap.energy import EnergyModel
from critlap.grid import DomainSpec, build_domain

dom = build_domain(DomainSpec("ball", 1 / 16, {"center": [0.0] * 3, "radius": 1.0}))
A = fields.constant(np.eye(3))
G = homog.power_sum([1.0], 6.0)
lam = spectra.lambda1(A, 2.0, dom, restarts=1)
print(f"lambda1 = {lam.value:.5f} (continuum pi^2 = {np.pi**2:.5f}), S^-1 = {1 / bubbles.sobolev_constant(3, 2.0):.5f}")

for factor in (0.8, 0.0):
    F = homog.power_sum([factor * lam.value], 2.0) if factor else None
    model = EnergyModel(dom, A, 2.0, F=F, G=G)
    cert = solve.existence_certificate(model, lam1_result=lam)
    print(f"\nlambda = {factor} lambda1: {cert.kind}")
    print(f"  K^-1 upper bound {cert.K_inv_upper_bound:.5f} from {cert.witness['family']}, N^-1 = {1 / cert.N_value:.5f}")
    if cert.kind == "existence":
        w, info = solve.scale_to_solution(cert.minimizer, model)
        rep = pohozaev.pohozaev_residual(w, A, F, np.zeros(3), dom, 2.0)
        print(f"  scaled solution: relative residual {info['relative']:.2e}, max value {w.max():.4f}")
        print(f"  Pohozaev: lhs {rep.lhs:.5f}, boundary {rep.boundary:.5f}, relative residual {rep.relative_residual:.3%}")
