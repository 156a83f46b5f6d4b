"""Coefficient fields ``x -> A(x)`` and the checks built on them.

Points are passed as arrays of shape ``(m, n)``; matrices come back with
shape ``(m, n, n)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AsymmetricCoefficient, DifferentiationUnavailable, DomainError, NotUniformlyElliptic
from .grid import GridDomain

__all__ = [
    "MatrixField",
    "constant",
    "shifted_power",
    "scalar_conformal",
    "sampled",
    "CellCoefficient",
    "validate_assumptions",
    "det_min",
    "ExpansionCheck",
    "check_expansion",
    "expansion_constant",
    "bfield",
    "check_pohozaev_condition",
    "sample_directions",
]

log = logging.getLogger(__name__)

_CHUNK = 20000


@dataclass
class MatrixField:
    """Symmetric matrix field on R^n.

    ``evaluate`` maps points ``(m, n)`` to matrices ``(m, n, n)``;
    ``derivative`` (when available) maps points to ``(m, n, n, n)`` with
    last index the differentiation axis.  ``iso`` (optional) maps points to
    the scalar ``a`` when ``A(x) = a(x) I``.
    """

    family: str
    n: int
    params: dict
    evaluate: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray] | None = None
    iso: Callable[[np.ndarray], np.ndarray] | None = None
    bfield_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.evaluate(x)

    def describe(self) -> str:
        items = []
        for k, v in self.params.items():
            if isinstance(v, np.ndarray) and v.size > 16:
                items.append(f"{k}=<array {v.shape}>")
            else:
                items.append(f"{k}={np.asarray(v).tolist()!r}")
        return f"{self.family}({', '.join(items)})"

    def cells(self, dom: GridDomain) -> "CellCoefficient":
        """Coefficient sampled at cell centres of ``dom`` (cached)."""
        key = ("cells", id(dom))
        hit = self._cache.get(key)
        if hit is not None and hit[0] is dom:
            return hit[1]
        pts = dom.cell_centers()[:, dom.cell_mask].T
        if self.iso is not None:
            a = np.zeros(dom.shape)
            a[dom.cell_mask] = self.iso(pts)
            cc = CellCoefficient(iso=a)
        else:
            full = np.zeros((dom.n, dom.n) + dom.shape)
            vals = self.evaluate(pts)
            full[:, :, dom.cell_mask] = np.moveaxis(vals, 0, -1)
            cc = CellCoefficient(full=full)
        self._cache[key] = (dom, cc)
        return cc


@dataclass
class CellCoefficient:
    """A(x) on lattice cells: scalar ``iso`` or full ``(n, n, *shape)``."""

    iso: np.ndarray | None = None
    full: np.ndarray | None = None

    def apply(self, g: np.ndarray) -> np.ndarray:
        """``A g`` for gradients of shape ``(..., n, *shape)``."""
        if self.iso is not None:
            return self.iso * g
        n = self.full.shape[0]
        lead = g.ndim - self.full.ndim + 1
        gm = g.reshape((-1, n) + g.shape[lead + 1 :])
        out = np.einsum("ij...,bj...->bi...", self.full, gm)
        return out.reshape(g.shape)


# families -----------------------------------------------------------------------
def _as_spd(M, n: int | None = None) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape == (1, 1) and n is not None:
        M = M[0, 0] * np.eye(n)
    if M.shape[0] != M.shape[1]:
        raise DomainError("matrix must be square")
    return M


def constant(M) -> MatrixField:
    """``A(x) = M``."""
    M = _as_spd(M)
    n = M.shape[0]

    def ev(x):
        return np.broadcast_to(M, (len(x), n, n)).copy()

    def dv(x):
        return np.zeros((len(x), n, n, n))

    iso = None
    if np.allclose(M, M[0, 0] * np.eye(n), atol=0, rtol=0):
        c = M[0, 0]
        iso = lambda x: np.full(len(x), c)  # noqa: E731
    return MatrixField("constant", n, {"M": M}, ev, dv, iso)


def shifted_power(M, C: float, gamma: float, x0) -> MatrixField:
    """``A(x) = M + C |x - x0|^gamma I``."""
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    M = _as_spd(M, n)
    C, gamma = float(C), float(gamma)
    eye = np.eye(n)

    def radial(x):
        return np.linalg.norm(x - x0, axis=1)

    def ev(x):
        return M + (C * radial(x) ** gamma)[:, None, None] * eye

    def dv(x):
        r = radial(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(r > 0, C * gamma * r ** (gamma - 2), 0.0)
        g = w[:, None] * (x - x0)
        return eye[None, :, :, None] * g[:, None, None, :]

    def bf(x, xc):
        r = radial(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(r > 0, C * gamma * r ** (gamma - 2), 0.0)
        s = w * np.sum((x - xc) * (x - x0), axis=1)
        return s[:, None, None] * eye

    iso = None
    if np.allclose(M, M[0, 0] * eye, atol=0, rtol=0):
        m0 = M[0, 0]
        iso = lambda x: m0 + C * radial(x) ** gamma  # noqa: E731
    return MatrixField(
        "shifted_power", n, {"M": M, "C": C, "gamma": gamma, "x0": x0}, ev, dv, iso, bf
    )


def scalar_conformal(a0: float, a1: float, beta: float, x0, p: float) -> MatrixField:
    """``A(x) = a(x)^{2/p} I`` with ``a(x) = a0 + a1 |x - x0|^beta``.

    Then ``<A xi, xi>^{p/2} = a(x) |xi|^p``.
    """
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    a0, a1, beta, p = float(a0), float(a1), float(beta), float(p)
    eye = np.eye(n)

    def a(x):
        return a0 + a1 * np.linalg.norm(x - x0, axis=1) ** beta

    def s(x):
        return a(x) ** (2.0 / p)

    def ev(x):
        return s(x)[:, None, None] * eye

    def grad_s(x):
        r = np.linalg.norm(x - x0, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            da = np.where(r > 0, a1 * beta * r ** (beta - 2), 0.0)
        return ((2.0 / p) * a(x) ** (2.0 / p - 1) * da)[:, None] * (x - x0)

    def dv(x):
        return eye[None, :, :, None] * grad_s(x)[:, None, None, :]

    def bf(x, xc):
        v = np.sum(grad_s(x) * (x - xc), axis=1)
        return v[:, None, None] * eye

    return MatrixField(
        "scalar_conformal", n, {"a0": a0, "a1": a1, "beta": beta, "x0": x0, "p": p}, ev, dv, s, bf
    )


def sampled(lo, h: float, values: np.ndarray, valid: np.ndarray | None = None) -> MatrixField:
    """Field given by matrices on a uniform lattice, multilinearly interpolated.

    Parameters
    ----------
    lo, h
        Lattice origin and spacing of the samples.
    values
        Array of shape ``(*shape, n, n)``.
    valid
        Boolean mask of nodes holding data (default: all).  Derivatives use
        central differences, one-sided where a neighbour is missing, and are
        unavailable where both neighbours are missing.
    """
    from scipy.interpolate import RegularGridInterpolator

    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    shape = values.shape[:n]
    lo = np.asarray(lo, dtype=float)
    axes = [lo[a] + h * np.arange(shape[a]) for a in range(n)]
    valid = np.ones(shape, dtype=bool) if valid is None else np.asarray(valid, bool)

    deriv = np.zeros(shape + (n, n, n))
    missing = np.zeros(shape, dtype=bool)
    for k in range(n):
        up = np.zeros(shape, dtype=bool)
        dn = np.zeros(shape, dtype=bool)
        sl_up = [slice(None)] * n
        sl_dn = [slice(None)] * n
        sl_up[k] = slice(None, -1)
        sl_dn[k] = slice(1, None)
        up[tuple(sl_up)] = valid[tuple(sl_dn)]
        dn[tuple(sl_dn)] = valid[tuple(sl_up)]
        fwd = np.zeros_like(values)
        bwd = np.zeros_like(values)
        fwd[tuple(sl_up)] = (values[tuple(sl_dn)] - values[tuple(sl_up)]) / h
        bwd[tuple(sl_dn)] = (values[tuple(sl_dn)] - values[tuple(sl_up)]) / h
        both = (up & dn)[..., None, None]
        d = np.where(both, 0.5 * (fwd + bwd), np.where(up[..., None, None], fwd, bwd))
        deriv[..., k] = d
        missing |= valid & ~up & ~dn
    interp = RegularGridInterpolator(axes, values, bounds_error=False, fill_value=None)
    dinterp = RegularGridInterpolator(axes, deriv, bounds_error=False, fill_value=None)
    miss_interp = RegularGridInterpolator(
        axes, missing.astype(float), bounds_error=False, fill_value=1.0, method="nearest"
    )

    def ev(x):
        return interp(x)

    def dv(x):
        if np.any(miss_interp(x) > 0):
            raise DifferentiationUnavailable("no neighbouring samples for a difference quotient")
        return dinterp(x)

    return MatrixField("sampled", n, {"lo": lo, "h": float(h), "values": values}, ev, dv)


# checks -------------------------------------------------------------------------
def validate_assumptions(A: MatrixField, dom: GridDomain, sym_tol: float = 1e-12) -> tuple[float, float]:
    """Ellipticity bounds ``(tau, Lambda)`` over nodes and cell centres of the closure.

    Raises
    ------
    AsymmetricCoefficient
        If ``|A - A^T|`` exceeds ``sym_tol`` relative to ``|A|`` somewhere.
    NotUniformlyElliptic
        If the smallest eigenvalue is not positive.
    """
    key = ("tau", id(dom))
    hit = A._cache.get(key)
    if hit is not None and hit[0] is dom:
        return hit[1]
    pts = dom.closure_points(with_cells=True)
    tau, lam = np.inf, -np.inf
    for i in range(0, len(pts), _CHUNK):
        m = A(pts[i : i + _CHUNK])
        asym = np.max(np.abs(m - np.swapaxes(m, 1, 2)))
        if asym > sym_tol * max(1.0, float(np.max(np.abs(m)))):
            raise AsymmetricCoefficient(f"asymmetry {asym:.3e} exceeds {sym_tol:g}")
        ev = np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, 1, 2)))
        tau = min(tau, float(ev[:, 0].min()))
        lam = max(lam, float(ev[:, -1].max()))
    if not tau > 0:
        raise NotUniformlyElliptic(f"smallest eigenvalue {tau!r} is not positive")
    A._cache[key] = (dom, (tau, lam))
    return tau, lam


def det_min(A: MatrixField, dom: GridDomain) -> tuple[float, np.ndarray]:
    """Minimum of ``det A`` over closure nodes; first node in lexicographic order wins ties."""
    mask = dom.mask.copy()
    from .grid import _dilate

    near = _dilate(mask)
    pts = dom.node_coords()[:, near].T
    best, arg = np.inf, None
    for i in range(0, len(pts), _CHUNK):
        dets = np.linalg.det(A(pts[i : i + _CHUNK]))
        j = int(np.argmin(dets))
        if dets[j] < best:
            best, arg = float(dets[j]), pts[i + j]
    return best, np.array(arg)


def sample_directions(n: int, n_random: int = 64, seed: int = 0) -> np.ndarray:
    """Axis directions followed by seeded random unit vectors, shape ``(k, n)``."""
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((n_random, n))
    r /= np.linalg.norm(r, axis=1, keepdims=True)
    return np.vstack([np.eye(n), r])


def _quadform(m: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """``<m_i xi_k, xi_k>`` for matrices ``(m, n, n)`` and directions ``(k, n)``."""
    return np.einsum("kj,mij,ki->mk", xi, m, xi)


@dataclass
class ExpansionCheck:
    """Outcome of a sampled expansion inequality check."""

    x0: np.ndarray
    C0: float
    gamma: float
    p: float
    direction: str
    max_violation: float
    n_points: int
    n_directions: int
    tol: float = 1e-12

    @property
    def holds(self) -> bool:
        return self.max_violation <= self.tol


def _near_points(x0: np.ndarray, h: float, n: int, seed: int = 1) -> np.ndarray:
    """Points approaching ``x0`` along axis and random rays, radii 1e-6*h .. h/2."""
    radii = h * np.geomspace(1e-6, 0.5, 12)
    dirs = sample_directions(n, 8, seed)
    dirs = np.vstack([dirs, -np.eye(n)])
    return (x0[None, None, :] + radii[:, None, None] * dirs[None, :, :]).reshape(-1, n)


def _expansion_ratio(A, x0, gamma, p, pts, xi):
    a0 = _quadform(A(x0[None, :]), xi)[0] ** (p / 2)
    out = []
    for i in range(0, len(pts), _CHUNK):
        x = pts[i : i + _CHUNK]
        lhs = _quadform(A(x), xi) ** (p / 2)
        r = np.linalg.norm(x - x0, axis=1) ** gamma
        out.append((lhs, a0[None, :], r[:, None]))
    return out


def check_expansion(
    A: MatrixField,
    x0,
    C0: float,
    gamma: float,
    dom: GridDomain,
    p: float,
    direction: str = "lower",
    delta: float | None = None,
    n_random: int = 64,
    seed: int = 0,
    tol: float = 1e-12,
) -> ExpansionCheck:
    """Sampled check of ``<A(x)xi,xi>^{p/2}`` against ``<A(x0)xi,xi>^{p/2} + C0|x-x0|^gamma``.

    ``direction="lower"`` checks ``>=`` and ``"upper"`` checks ``<=`` (only
    inside ``B(x0, delta)`` when ``delta`` is given).  Directions ``xi`` are unit
    vectors.  The reported violation is the signed amount by which the
    inequality fails, maximised over samples; it is scaled by ``1 + |rhs|``.
    """
    if direction not in ("lower", "upper"):
        raise ValueError("direction must be 'lower' or 'upper'")
    x0 = np.asarray(x0, dtype=float)
    pts = np.vstack([dom.closure_points(with_cells=True), _near_points(x0, dom.h, dom.n)])
    if delta is not None:
        pts = pts[np.linalg.norm(pts - x0, axis=1) < delta]
    xi = sample_directions(dom.n, n_random, seed)
    worst = -np.inf
    for lhs, a0, r in _expansion_ratio(A, x0, gamma, p, pts, xi):
        rhs = a0 + C0 * r
        v = (rhs - lhs) if direction == "lower" else (lhs - rhs)
        worst = max(worst, float(np.max(v / (1.0 + np.abs(rhs)))))
    return ExpansionCheck(x0, float(C0), float(gamma), float(p), direction, worst, len(pts), len(xi), tol)


def expansion_constant(
    A: MatrixField, x0, gamma: float, dom: GridDomain, p: float, n_random: int = 64, seed: int = 0
) -> float:
    """Largest ``C0`` passing the sampled lower expansion check (before tolerance).

    Computed as the sampled infimum of
    ``(<A(x)xi,xi>^{p/2} - <A(x0)xi,xi>^{p/2}) / |x-x0|^gamma``.
    """
    x0 = np.asarray(x0, dtype=float)
    pts = np.vstack([dom.closure_points(with_cells=True), _near_points(x0, dom.h, dom.n)])
    pts = pts[np.linalg.norm(pts - x0, axis=1) > 0]
    xi = sample_directions(dom.n, n_random, seed)
    best = np.inf
    for lhs, a0, r in _expansion_ratio(A, x0, gamma, p, pts, xi):
        best = min(best, float(np.min((lhs - a0) / r)))
    return best


def bfield(A: MatrixField, x0) -> Callable[[np.ndarray], np.ndarray]:
    """The field ``B(x)_ij = (x - x0) . grad a_ij(x)`` as a callable on points.

    Analytic for the built-in families; the sampled family uses its
    difference-quotient derivative.
    """
    x0 = np.asarray(x0, dtype=float)
    if A.bfield_fn is not None:
        return lambda x: A.bfield_fn(np.atleast_2d(np.asarray(x, float)), x0)
    if A.derivative is None:
        raise DifferentiationUnavailable(f"{A.family} has no derivative")

    def B(x):
        x = np.atleast_2d(np.asarray(x, float))
        return np.einsum("mijk,mk->mij", A.derivative(x), x - x0)

    return B


def check_pohozaev_condition(
    A: MatrixField,
    x0,
    gamma: float,
    dom: GridDomain,
    p: float,
    n_random: int = 64,
    seed: int = 0,
) -> tuple[bool, float]:
    """Sampled infimum of ``(p/2)<A xi,xi>^{(p-2)/2}<B xi,xi> / (gamma |x-x0|^gamma)``.

    Taken over unit ``xi`` and sample points ``x != x0`` of the closure,
    including points close to ``x0``.  Returns ``(C0_est > 0, C0_est)``.
    """
    x0 = np.asarray(x0, dtype=float)
    B = bfield(A, x0)
    pts = np.vstack([dom.closure_points(with_cells=True), _near_points(x0, dom.h, dom.n)])
    pts = pts[np.linalg.norm(pts - x0, axis=1) > 0]
    xi = sample_directions(dom.n, n_random, seed)
    best = np.inf
    for i in range(0, len(pts), _CHUNK):
        x = pts[i : i + _CHUNK]
        qa = _quadform(A(x), xi)
        qb = _quadform(B(x), xi)
        r = np.linalg.norm(x - x0, axis=1) ** gamma
        val = 0.5 * p * qa ** ((p - 2) / 2) * qb / (gamma * r[:, None])
        best = min(best, float(np.min(val)))
    return bool(best > 0), best
