"""Nonexistence below lambda_* for A = (1 + |x|^p) I on the disk.

The Pohozaev identity gives a threshold lambda_* = gamma C0 / (p K0^p); no
solution exists when F = lambda |s|^p with lambda < lambda_*.  The sweep
shows that the existence and nonexistence certificates never fire together.
"""

import numpy as np

from critlap import fields, homog, pohozaev, solve, spectra
from critlap.energy import EnergyModel
from critlap.errors import ChecklistFailure
from critlap.grid import DomainSpec, build_domain

n, p = 2, 1.5
dom = build_domain(DomainSpec("ball", 1 / 32, {"center": [0.0, 0.0], "radius": 1.0}))
A = fields.shifted_power(np.eye(2), 1.0, p, [0.0, 0.0])
G = homog.power_sum([1.0], n * p / (n - p))
_, C0 = fields.check_pohozaev_condition(A, [0.0, 0.0], p, dom, p)
lam1 = spectra.lambda1(A, p, dom, restarts=1)
lam_star = pohozaev.nonexistence_bound(C0, p, p, p / n)
print(f"C0 = {C0:.5f}, K0 = p/n = {p / n}, lambda_* = {lam_star:.5f}, lambda1 = {lam1.value:.5f}")

print(f"\n{'lambda':>9} {'nonexistence':>14} {'existence':>14}")
for lam in np.linspace(0.1, 0.95, 6) * lam1.value:
    F = homog.power_sum([lam], p)
    non = pohozaev.nonexistence_certificate(A, F, G, dom, [0.0, 0.0], C0, p, p, lam1=lam1.value, K0=p / n)
    try:
        ex = solve.existence_certificate(EnergyModel(dom, A, p, F=F, G=G), lam1_result=lam1, minimize_maxiter=300).kind
    except ChecklistFailure as exc:
        ex = f"fails {exc.hypothesis}"
    print(f"{lam:9.4f} {non.kind:>14} {ex:>14}")
