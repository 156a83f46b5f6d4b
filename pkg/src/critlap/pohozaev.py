"""Pohozaev identity audit and the nonexistence certificate.

For a solution vanishing on the boundary the identity reads

    p int F(u) = (p-1) sum_j int_bdry <A grad u_j, grad u_j>^{p/2} <x - x0, nu> dS
                 + (p/2) sum_j int <A grad u_j, grad u_j>^{(p-2)/2} <B grad u_j, grad u_j>

with ``B_ij = <x - x0, grad a_ij>``; the critical term ``G`` drops out.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .energy import EnergyModel
from .errors import BFieldUnavailable, ChecklistFailure, DifferentiationUnavailable
from .fields import (
    MatrixField,
    _near_points,
    bfield,
    check_pohozaev_condition,
    validate_assumptions,
)
from .grid import GridDomain, _shift, gradient
from .homog import HomogeneousFn, extrema_on_p_sphere
from .solve import Certificate
from .spectra import hardy_sobolev_K0

__all__ = [
    "PohozaevReport",
    "star_shaped_check",
    "boundary_gradient",
    "pohozaev_residual",
    "nonexistence_bound",
    "nonexistence_certificate",
]

log = logging.getLogger(__name__)

EPS_DEN = 1e-300


@dataclass
class PohozaevReport:
    """Terms of the identity for one field."""

    lhs: float
    boundary: float
    volume: float
    residual: float
    relative_residual: float
    star_shaped: bool
    min_facet_term: float
    lambda_star: float | None = None
    M_F: float | None = None
    audit: str = "conditional"

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def star_shaped_check(dom: GridDomain, x0) -> bool:
    """``<x_f - x0, nu_f> >= -h`` at every boundary facet centroid."""
    x0 = np.asarray(x0, float)
    s = np.sum((dom.facet_centroids() - x0) * dom.facet_normals(), axis=1)
    return bool(np.all(s >= -dom.h))


def boundary_gradient(u: np.ndarray, dom: GridDomain, smoothing: float = 1.5) -> np.ndarray:
    """Gradient of each component at the boundary facets, shape ``(d, m, n)``.

    Each facet carries the one-sided outward difference ``-u_i / h`` from its
    interior node to the exterior neighbour, where ``u = 0``.  On a staircase
    boundary these values are right only on average, so they are smoothed
    along the boundary with a Gaussian of width ``smoothing * h``.  The result
    is divided by the smoothed facet area ``|sum K nu_f|``, and the gradient
    is that normal derivative times the smoothed unit normal.  With
    ``smoothing = 0`` the raw facet gradient is returned: the one-sided normal
    difference plus tangential components averaged from central differences.
    """
    u = np.asarray(u, float)
    if u.ndim == dom.n:
        u = u[None]
    d, n, h = u.shape[0], dom.n, dom.h
    nodes = dom.facet_nodes
    axis = dom.facet_axis
    sign = dom.facet_sign
    rows = np.arange(len(axis))
    ui = u[(slice(None),) + tuple(nodes.T)]
    if smoothing > 0:
        nu = dom.facet_normals()
        K = _facet_kernel(dom, smoothing)
        S = K @ nu
        area = np.linalg.norm(S, axis=1)
        N = S / area[:, None]
        dn = (K @ (-ui / h).T).T / area
        return dn[:, :, None] * N[None]
    ext = nodes.copy()
    ext[rows, axis] += sign
    out = np.empty((d, len(axis), n))
    for b in range(n):
        cb = (_shift(u, 1 + b, 1, 0.0) - _shift(u, 1 + b, -1, 0.0)) / (2 * h)
        out[:, :, b] = 0.5 * (cb[(slice(None),) + tuple(nodes.T)] + cb[(slice(None),) + tuple(ext.T)])
    out[:, rows, axis] = -sign * ui / h
    return out


def _facet_kernel(dom: GridDomain, smoothing: float) -> sp.csr_matrix:
    key = ("facet_kernel", smoothing)
    hit = dom.cache.get(key)
    if hit is not None:
        return hit
    rho = smoothing * dom.h
    tree = cKDTree(dom.facet_centroids())
    D = tree.sparse_distance_matrix(tree, 3 * rho, output_type="coo_matrix")
    m = dom.n_facets
    K = sp.csr_matrix((np.exp(-0.5 * (D.data / rho) ** 2), (D.row, D.col)), shape=(m, m))
    K = K + sp.identity(m, format="csr")
    dom.cache[key] = K
    return K


def _bfield_cells(A: MatrixField, x0, dom: GridDomain) -> np.ndarray:
    try:
        B = bfield(A, x0)
    except DifferentiationUnavailable as exc:
        raise BFieldUnavailable(str(exc)) from exc
    pts = dom.cell_centers()[:, dom.cell_mask].T
    return B(pts)


def pohozaev_residual(
    u: np.ndarray,
    A: MatrixField,
    F: HomogeneousFn | None,
    x0,
    dom: GridDomain,
    p: float,
    G: HomogeneousFn | None = None,
    smoothing: float = 1.5,
) -> PohozaevReport:
    """Evaluate the three terms of the identity at ``u``.

    ``G`` is accepted for interface symmetry; it does not enter.  The
    relative residual is taken against ``max(|lhs|, |boundary|, |volume|)``.
    ``smoothing`` is the boundary kernel width in units of ``h`` (see
    :func:`boundary_gradient`).

    Raises
    ------
    BFieldUnavailable
        If ``A`` has no derivative from which to form ``B``.
    """
    u = np.asarray(u, float)
    if u.ndim == dom.n:
        u = u[None]
    x0 = np.asarray(x0, float)
    model = EnergyModel(dom, A, p, F=F, d=u.shape[0])
    lhs = p * model.F_int(u)

    gb = boundary_gradient(u, dom, smoothing)
    Af = A(dom.facet_centroids())
    qf = np.einsum("jmi,mik,jmk->jm", gb, Af, gb)
    geo = np.sum((dom.facet_centroids() - x0) * dom.facet_normals(), axis=1)
    facet = (p - 1) * np.sum(np.maximum(qf, 0.0) ** (p / 2), axis=0) * geo * dom.dS
    boundary = float(np.sum(facet))

    Bc = _bfield_cells(A, x0, dom)
    g = gradient(u, dom)[..., dom.cell_mask]  # (d, n, m)
    Ac = A(dom.cell_centers()[:, dom.cell_mask].T)
    qa = np.einsum("jim,mik,jkm->jm", g, Ac, g)
    qb = np.einsum("jim,mik,jkm->jm", g, Bc, g)
    with np.errstate(divide="ignore", invalid="ignore"):
        wgt = np.where(qa > 0, np.maximum(qa, 0.0) ** ((p - 2) / 2), 0.0)
    volume = float(0.5 * p * np.sum(wgt * qb) * dom.dV)

    res = lhs - boundary - volume
    den = max(abs(lhs), abs(boundary), abs(volume), EPS_DEN)
    return PohozaevReport(
        lhs=lhs,
        boundary=boundary,
        volume=volume,
        residual=res,
        relative_residual=abs(res) / den if den > EPS_DEN else 0.0,
        star_shaped=star_shaped_check(dom, x0),
        min_facet_term=float(facet.min()) if facet.size else 0.0,
    )


def nonexistence_bound(C0: float, gamma: float, p: float, K0: float) -> float:
    """``lambda_* = gamma C0 / (p K0^p)``."""
    return gamma * C0 / (p * K0**p)


def nonexistence_certificate(
    A: MatrixField,
    F: HomogeneousFn,
    G: HomogeneousFn,
    dom: GridDomain,
    x0,
    C0: float,
    gamma: float,
    p: float,
    lam1: float | None = None,
    K0: float | None = None,
    b_bound: float = 1e8,
) -> Certificate:
    """Compare the certified ``M_F`` with ``lambda_*``.

    The checklist covers ellipticity, boundedness of ``B`` near ``x0``,
    star-shapedness, the sampled lower bound on ``B`` with constant ``C0``,
    ``gamma in (0, p]`` and the degrees of ``F`` and ``G``.

    Raises
    ------
    ChecklistFailure
        Naming the first hypothesis that fails.
    """
    n = dom.n
    x0 = np.asarray(x0, float)
    checklist: dict = {}
    values: dict = {}
    if not 0 < gamma <= p:
        raise ChecklistFailure("gamma", f"need 0 < gamma <= p, got {gamma}")
    checklist["gamma"] = True
    ps = n * p / (n - p)
    if F is not None and abs(F.q - p) > 1e-12:
        raise ChecklistFailure("H1", "deg F != p")
    if G is None or abs(G.q - ps) > 1e-12:
        raise ChecklistFailure("H2", "deg G != p*")
    checklist["H1"] = checklist["H2"] = True
    try:
        tau, lam = validate_assumptions(A, dom)
    except Exception as exc:
        raise ChecklistFailure("A1-A3", str(exc)) from exc
    checklist["A1-A3"] = True
    values["tau"], values["Lambda"] = tau, lam
    try:
        B = bfield(A, x0)
    except DifferentiationUnavailable as exc:
        raise ChecklistFailure("B-continuity", str(exc)) from exc
    near = _near_points(x0, dom.h, n)
    bmax = float(np.max(np.abs(B(near))))
    if not (np.isfinite(bmax) and bmax <= b_bound):
        raise ChecklistFailure("B-continuity", f"B is unbounded near x0 (max {bmax:g})")
    checklist["B-continuity"] = True
    values["B_max_near_x0"] = bmax
    if not star_shaped_check(dom, x0):
        raise ChecklistFailure("star-shape", "a boundary facet faces x0")
    checklist["star-shape"] = True
    holds, C0_est = check_pohozaev_condition(A, x0, gamma, dom, p)
    values["C0_sampled"] = C0_est
    if not (holds and C0 <= C0_est * (1 + 1e-12)):
        raise ChecklistFailure("B-lower-bound", f"sampled infimum {C0_est:g} is below C0 = {C0:g}")
    checklist["B-lower-bound"] = True
    if K0 is None:
        K0, info = hardy_sobolev_K0(n, p, gamma, dom=dom, x0=x0)
        values["K0_path"] = info["path"]
    values["K0"] = K0
    lam_star = nonexistence_bound(C0, gamma, p, K0)
    MF = extrema_on_p_sphere(F, p).M if F is not None else 0.0
    values["lambda_star"] = lam_star
    values["M_F"] = MF
    values["gap"] = lam_star - MF
    if lam1 is not None:
        values["lambda1"] = lam1
        values["lambda_star_below_lambda1"] = bool(lam_star < lam1)
        if not lam_star < lam1:
            log.warning("lambda_* = %g is not below lambda_1 = %g", lam_star, lam1)
    kind = "nonexistence" if MF < lam_star else "inconclusive"
    return Certificate(
        kind=kind,
        checklist=checklist,
        tolerances={"h": dom.h, "star_shape_tol": dom.h},
        values=values,
        witness={"x0": x0.tolist(), "C0": C0, "gamma": gamma},
    )
