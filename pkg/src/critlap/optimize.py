"""Preconditioned descent for scale-invariant objectives.

Every minimisation in the package has the form ``min R(x)`` where ``R`` is
invariant under ``x -> c x`` (a Rayleigh-type quotient).  :func:`descend`
runs limited-memory quasi-Newton steps in the metric of a fixed SPD
preconditioner, with Armijo backtracking, and renormalises the iterate after
every accepted step.  Because ``R`` is scale invariant the renormalisation
does not change the objective value.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import GridDomain

__all__ = ["stiffness_matrix", "Preconditioner", "DescentResult", "descend"]

log = logging.getLogger(__name__)


def stiffness_matrix(dom: GridDomain, cell_weight: np.ndarray, d: int = 1, mass: float = 0.0) -> sp.csr_matrix:
    """Dirichlet stiffness of the forward-difference gradient on interior nodes.

    ``K = sum_cells sum_axes w_c h^{n-2} (e_{c+e_a} - e_c)(...)^T`` restricted to
    interior unknowns, plus ``mass * h^n I``.  With ``d > 1`` the matrix is
    block diagonal with identical blocks.
    """
    n = dom.n
    idx = -np.ones(dom.shape, dtype=np.int64)
    idx[dom.mask] = np.arange(dom.n_interior)
    rows, cols, vals = [], [], []
    diag = np.full(dom.n_interior, mass * dom.dV)
    scale = dom.h ** (n - 2)
    for a in range(n):
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        i0 = idx[tuple(lo)]
        i1 = idx[tuple(hi)]
        w = cell_weight[tuple(lo)] * scale
        for ia, ib in ((i0, i1), (i1, i0)):
            m = ia >= 0
            np.add.at(diag, ia[m], w[m])
        both = (i0 >= 0) & (i1 >= 0)
        rows += [i0[both], i1[both]]
        cols += [i1[both], i0[both]]
        vals += [-w[both], -w[both]]
    rows.append(np.arange(dom.n_interior))
    cols.append(np.arange(dom.n_interior))
    vals.append(diag)
    K = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dom.n_interior, dom.n_interior),
    )
    if d > 1:
        K = sp.block_diag([K] * d, format="csr")
    return K


class Preconditioner:
    """Approximate inverse of a sparse SPD matrix.

    A sparse LU factorisation is used for small systems and a smoothed
    aggregation V-cycle with symmetric Gauss-Seidel smoothing otherwise.
    """

    def __init__(self, K: sp.csr_matrix, direct_limit: int = 60000) -> None:
        self.K = K
        self.size = K.shape[0]
        if self.size <= direct_limit:
            self.kind = "splu"
            lu = spla.splu(K.tocsc())
            self._solve = lu.solve
        else:
            import pyamg

            self.kind = "amg"
            # the setup's spectral radius estimate draws from the global legacy RNG
            state = np.random.get_state()
            np.random.seed(0)
            try:
                ml = pyamg.smoothed_aggregation_solver(
                    K,
                    symmetry="symmetric",
                    presmoother=("gauss_seidel", {"sweep": "symmetric"}),
                    postsmoother=("gauss_seidel", {"sweep": "symmetric"}),
                )
            finally:
                np.random.set_state(state)
            M = ml.aspreconditioner(cycle="V")
            self._solve = lambda r: M @ r

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self._solve(r)


@dataclass
class DescentResult:
    """Outcome of :func:`descend`."""

    x: np.ndarray
    value: float
    residual: float
    iterations: int
    evaluations: int
    converged: bool
    history: list = field(default_factory=list)
    reason: str = ""


def descend(
    fun: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    normalize: Callable[[np.ndarray], np.ndarray],
    precond: Callable[[np.ndarray], np.ndarray] | None = None,
    stop: Callable[[float, float], bool] | None = None,
    maxiter: int = 2000,
    memory: int = 8,
    armijo: float = 1e-4,
    max_backtracks: int = 40,
    callback: Callable[[int, float, np.ndarray], None] | None = None,
    ftol: float | None = None,
    window: int = 100,
) -> DescentResult:
    """Minimise a scale-invariant objective.

    Parameters
    ----------
    fun
        Returns ``(R(x), grad R(x))``; ``R`` may be ``+inf`` where undefined.
    normalize
        Maps ``x`` to the representative of its ray used for iteration.
    precond
        Approximate inverse Hessian applied to a gradient.
    stop
        ``stop(value, residual)`` ends the run, where ``residual`` is
        ``sqrt(g . P g)``.
    ftol
        If given, also stop once the value has dropped by at most
        ``ftol * |R|`` over the last ``window`` iterations.  Used for
        ``p < 2``, where the gradient is not Lipschitz near ``grad u = 0``
        and its norm can stall long after the value has settled.  With
        ``ftol`` set, a failed line search from a steepest-descent step also
        counts as converged.
    """
    P = precond if precond is not None else (lambda g: g)
    x = normalize(np.asarray(x0, float))
    f, g = fun(x)
    if not np.isfinite(f):
        raise ValueError("initial point is infeasible")
    hist = [f]
    S: deque = deque(maxlen=memory)
    Y: deque = deque(maxlen=memory)
    evals = 1
    res = np.inf
    for it in range(maxiter):
        Pg = P(g)
        res = float(np.sqrt(max(np.dot(g, Pg), 0.0)))
        if stop is not None and stop(f, res):
            return DescentResult(x, f, res, it, evals, True, hist, "gradient")
        if ftol is not None and len(hist) > window and hist[-window - 1] - f <= ftol * abs(f):
            return DescentResult(x, f, res, it, evals, True, hist, "stagnation")
        # two-loop recursion in the preconditioned metric
        q = g.copy()
        alphas = []
        for s, y in reversed(list(zip(S, Y))):
            rho = 1.0 / np.dot(y, s)
            a = rho * np.dot(s, q)
            alphas.append((a, rho, s, y))
            q -= a * y
        r = P(q)
        if S:
            s, y = S[-1], Y[-1]
            r *= np.dot(s, y) / np.dot(y, P(y))
        for a, rho, s, y in reversed(alphas):
            b = rho * np.dot(y, r)
            r += (a - b) * s
        dirn = -r
        slope = float(np.dot(g, dirn))
        if not slope < 0:
            S.clear()
            Y.clear()
            dirn = -Pg
            slope = -res**2
        t = 1.0
        if not S:
            xs = float(np.max(np.abs(x)))
            ds = float(np.max(np.abs(dirn)))
            if ds > 0.2 * xs:
                t = 0.2 * xs / ds
        accepted = False
        for _ in range(max_backtracks):
            xn = x + t * dirn
            fn, gn = fun(xn)
            evals += 1
            if np.isfinite(fn) and fn <= f + armijo * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            log.debug("line search failed at iteration %d", it)
            if S:
                S.clear()
                Y.clear()
                continue
            # no decrease within round-off counts as stagnation when that rule is on
            return DescentResult(x, f, res, it, evals, ftol is not None, hist, "linesearch")
        c = normalize(xn)
        scale = float(np.dot(c, xn) / np.dot(xn, xn))
        gn = gn / scale
        s_vec = c - x
        y_vec = gn - g
        if np.dot(s_vec, y_vec) > 1e-12 * np.linalg.norm(s_vec) * np.linalg.norm(y_vec):
            S.append(s_vec)
            Y.append(y_vec)
        x, f, g = c, fn, gn
        hist.append(f)
        if callback is not None:
            callback(it, f, x)
    Pg = P(g)
    res = float(np.sqrt(max(np.dot(g, Pg), 0.0)))
    done = stop is not None and stop(f, res)
    return DescentResult(x, f, res, maxiter, evals, done, hist, "gradient" if done else "maxiter")
