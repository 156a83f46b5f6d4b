"""Decay orders of the cutoff bubble norms.

As the scale eps shrinks, the cutoff bubble approaches the extremal: its
gradient norm tends to S^{-1}, its critical norm to 1, and its L^p norm
vanishes at a rate that depends on whether n exceeds p^2.  The fitted
exponents are compared with the predicted ones.
"""

from critlap import bubbles

for n, p in ((3, 1.5), (4, 2.0), (3, 2.0)):
    rep = bubbles.bubble_asymptotics(n, p)
    print(f"n = {n}, p = {p:g}")
    for name, fitted, predicted, coef in rep.table():
        extra = "" if coef is None else f"   coefficient {coef:.5f}"
        print(f"  {name:>16}: fitted {fitted:7.3f}  predicted {predicted:7.3f}{extra}")
    if n >= p * p:
        print(f"  b_np = {bubbles.b_np(n, p):.5f}")
