"""First eigenvalues of the anisotropic p-Laplacian and the Hardy-Sobolev constant."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyModel
from .errors import ConstraintInfeasible, DomainError, NoConvergence
from .fields import MatrixField, scalar_conformal
from .grid import GridDomain
from .homog import HomogeneousFn, extrema_on_p_sphere, positive_F_bump
from .optimize import Preconditioner, descend, stiffness_matrix

__all__ = ["SpectralResult", "lambda1", "lambda1F", "hardy_sobolev_K0", "make_preconditioner"]

log = logging.getLogger(__name__)


@dataclass
class SpectralResult:
    """Minimal value of a Rayleigh-type quotient and its minimiser."""

    value: float
    field: np.ndarray
    iterations: int
    residual: float
    converged: bool
    method: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            **{f"method.{k}": v for k, v in self.method.items()},
        }


# relative value change over 100 iterations accepted as convergence when p < 2
STAGNATION_FTOL = 1e-8


def _cell_weight(model: EnergyModel) -> np.ndarray:
    c = model.coef
    if c.iso is not None:
        return c.iso
    n = c.full.shape[0]
    return sum(c.full[i, i] for i in range(n)) / n


def make_preconditioner(model: EnergyModel) -> Preconditioner:
    """Stiffness-matrix preconditioner for the unknowns of ``model`` (cached)."""
    key = ("precond", model.d)
    hit = model.A._cache.get((key, id(model.dom)))
    if hit is not None and hit[0] is model.dom:
        return hit[1]
    K = stiffness_matrix(model.dom, _cell_weight(model), d=model.d)
    # sparse LU fill-in grows fast in 3D
    P = Preconditioner(K, direct_limit=60000 if model.dom.n == 2 else 15000)
    model.A._cache[(key, id(model.dom))] = (model.dom, P)
    return P


def positive_start(dom: GridDomain, rng: np.random.Generator, d: int = 1) -> np.ndarray:
    """Smooth positive profile (distance to the exterior) with seeded multiplicative noise."""
    from scipy import ndimage

    dist = ndimage.distance_transform_edt(dom.mask)
    base = np.sin(0.5 * np.pi * dist / dist.max())
    noise = 1.0 + 0.5 * rng.random((d,) + dom.shape)
    return base[None] * noise * dom.mask


def _minimize_ratio(model, num, den, x0s, tol, maxiter, label):
    """Minimise ``num/den`` (both p-homogeneous) over starts; keep the best."""
    dom, d, p = model.dom, model.d, model.p
    P = make_preconditioner(model)

    def fun(x):
        u = dom.embed(x, d)
        N, gN = num(u)
        D, gD = den(u)
        if not D > 0:
            return np.inf, np.zeros_like(x)
        R = N / D
        return R, dom.restrict((gN - R * gD) / D)

    def normalize(x):
        D = den(dom.embed(x, d))[0]
        return x / D ** (1.0 / p)

    results = []
    for x0 in x0s:
        r = descend(
            fun,
            dom.restrict(x0),
            normalize,
            P,
            stop=lambda f, res: res <= tol * abs(f),
            maxiter=maxiter,
            ftol=STAGNATION_FTOL if p < 2 else None,
        )
        results.append(r)
    vals = [r.value for r in results]
    best = results[int(np.argmin(vals))]
    method = {
        "kind": label,
        "preconditioner": P.kind,
        "restarts": len(results),
        "spread": float(max(vals) - min(vals)),
        "stop": best.reason,
        "tol": tol,
        "eps_g": model.eps_g if p < 2 else 0.0,
        "h": dom.h,
    }
    return best, method


def lambda1(
    A: MatrixField,
    p: float,
    dom: GridDomain,
    restarts: int = 5,
    seed: int = 0,
    tol: float = 1e-8,
    maxiter: int = 3000,
    strict: bool = True,
) -> SpectralResult:
    """``inf W(u)`` over scalar fields with ``int |u|^p = 1``.

    Each restart starts from a positive profile with seeded noise; the best
    run is returned, sign-aligned to be nonnegative in sum.
    """
    model = EnergyModel(dom, A, p, d=1)
    rng = np.random.default_rng(seed)
    starts = [positive_start(dom, rng) for _ in range(restarts)]
    best, method = _minimize_ratio(
        model, model.wA_and_grad, lambda u: (model.lp(u), model.lp_grad(u)), starts, tol, maxiter, "lambda1"
    )
    u = dom.embed(best.x, 1)
    if u.sum() < 0:
        u = -u
    if strict and not best.converged:
        raise NoConvergence(f"lambda1 residual {best.residual:.3e} after {best.iterations} iterations")
    return SpectralResult(best.value, u, best.iterations, best.residual, best.converged, method)


def lambda1F(
    A: MatrixField,
    p: float,
    F: HomogeneousFn,
    dom: GridDomain,
    restarts: int = 3,
    seed: int = 0,
    tol: float = 1e-8,
    maxiter: int = 3000,
    strict: bool = True,
) -> SpectralResult:
    """``inf W(u)`` over vector fields with ``int F(u) = 1``.

    Raises
    ------
    ConstraintInfeasible
        If ``M_F <= 0``.
    """
    if abs(F.q - p) > 1e-12:
        raise DomainError("F must have degree p")
    if not extrema_on_p_sphere(F, p).M > 0:
        raise ConstraintInfeasible("M_F <= 0, so int F(u) = 1 has no solution")
    model = EnergyModel(dom, A, p, F=F, d=F.d)
    rng = np.random.default_rng(seed)
    bump = positive_F_bump(F, dom, p)
    starts = [bump]
    for _ in range(restarts - 1):
        starts.append(bump * (1.0 + 0.3 * rng.random(bump.shape)))
    best, method = _minimize_ratio(
        model, model.wA_and_grad, lambda u: (model.F_int(u), model.F_grad(u)), starts, tol, maxiter, "lambda1F"
    )
    if strict and not best.converged:
        raise NoConvergence(f"lambda1F residual {best.residual:.3e} after {best.iterations} iterations")
    return SpectralResult(best.value, dom.embed(best.x, F.d), best.iterations, best.residual, best.converged, method)


def _hardy_weight_field(dom: GridDomain, x0: np.ndarray, gamma: float, p: float) -> MatrixField:
    A = scalar_conformal(0.0, 1.0, gamma, x0, p)
    cc = A.cells(dom)
    centers = dom.cell_centers()
    dist = np.linalg.norm(centers - x0.reshape((-1,) + (1,) * dom.n), axis=0)
    hit = (dist < 1e-12 * dom.h) & dom.cell_mask
    if hit.any():
        # cell centred at x0: use the cell average of |x - x0|^gamma
        g, w = np.polynomial.legendre.leggauss(8)
        pts = np.stack(np.meshgrid(*([0.5 * dom.h * g] * dom.n), indexing="ij")).reshape(dom.n, -1)
        wts = np.prod(np.stack(np.meshgrid(*([0.5 * w] * dom.n), indexing="ij")).reshape(dom.n, -1), axis=0)
        avg = float(np.sum(wts * np.linalg.norm(pts, axis=0) ** gamma))
        cc.iso[hit] = avg ** (2.0 / p)
    return A


def hardy_sobolev_K0(
    n: int,
    p: float,
    gamma: float,
    dom: GridDomain | None = None,
    x0=None,
    numeric: bool = False,
    restarts: int = 1,
    seed: int = 0,
    tol: float = 1e-7,
    maxiter: int = 4000,
) -> tuple[float, dict]:
    """Best constant in ``||u||_p <= K0 || |x-x0|^{gamma/p} grad u ||_p``.

    For ``gamma = p`` the exact value ``p/n`` is returned unless ``numeric``
    is set.  Otherwise the weighted quotient is minimised on ``dom`` with the
    weight taken at cell centres.

    Returns
    -------
    K0, info
        ``info["path"]`` is ``"closed-form"`` or ``"numeric"``.
    """
    if not 0 < gamma <= p:
        raise DomainError("need 0 < gamma <= p")
    if gamma == p and not numeric:
        return p / n, {"path": "closed-form"}
    if dom is None or x0 is None:
        raise DomainError("numeric Hardy-Sobolev constant needs a domain and a centre")
    x0 = np.asarray(x0, float)
    A = _hardy_weight_field(dom, x0, gamma, p)
    model = EnergyModel(dom, A, p, d=1)
    rng = np.random.default_rng(seed)
    starts = [positive_start(dom, rng) for _ in range(restarts)]
    best, method = _minimize_ratio(
        model, model.wA_and_grad, lambda u: (model.lp(u), model.lp_grad(u)), starts, tol, maxiter, "hardy"
    )
    if not best.converged:
        log.warning("Hardy-Sobolev descent stopped at residual %.3e", best.residual)
    K0 = (1.0 / best.value) ** (1.0 / p)
    return K0, {"path": "numeric", "min_quotient": best.value, "converged": best.converged, **method}
