"""Positively homogeneous nonlinearities on R^d.

A :class:`HomogeneousFn` evaluates ``H(s)`` and its exact gradient for
vectors stored along the *first* axis, so lattice fields of shape
``(d, *grid)`` can be passed directly.  Use :meth:`HomogeneousFn.at` for a
single point or rows of points with ``d`` along the last axis.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _smooth
from .errors import DomainError, NoGoodDirection, NoPositiveDirection

__all__ = [
    "HomogeneousFn",
    "power_sum",
    "quad_form_power",
    "monomial",
    "elem_symmetric",
    "linear_combination",
    "SphereExtrema",
    "extrema_on_p_sphere",
    "find_good_direction",
    "positive_F_bump",
    "p_norm",
]

log = logging.getLogger(__name__)


def _spow(x: np.ndarray, a: float) -> np.ndarray:
    """Signed power ``sign(x)|x|^a``, zero at zero."""
    return np.sign(x) * np.abs(x) ** a


def p_norm(s: np.ndarray, p: float, axis: int = 0) -> np.ndarray:
    return np.sum(np.abs(s) ** p, axis=axis) ** (1.0 / p)


@dataclass
class HomogeneousFn:
    """Degree-``q`` positively homogeneous function of ``d`` variables.

    Construct through the family helpers (:func:`power_sum` and friends).
    ``smooth`` records whether the parameters give a C^1 function; the
    helpers refuse non-smooth parameters unless ``allow_nonsmooth`` is set.
    """

    family: str
    d: int
    q: float
    params: dict = field(default_factory=dict)
    terms: tuple = ()
    smooth: bool = True

    # evaluation ------------------------------------------------------------
    def __call__(self, s: np.ndarray) -> np.ndarray:
        """Evaluate with components along axis 0."""
        s = np.asarray(s, dtype=float)
        self._check(s)
        return getattr(self, "_eval_" + self.family)(s)

    def grad(self, s: np.ndarray) -> np.ndarray:
        """Gradient with components along axis 0 (same shape as ``s``)."""
        s = np.asarray(s, dtype=float)
        self._check(s)
        return getattr(self, "_grad_" + self.family)(s)

    def at(self, s: np.ndarray) -> np.ndarray:
        """Evaluate at points with components along the last axis."""
        return self(np.moveaxis(np.asarray(s, dtype=float), -1, 0))

    def grad_at(self, s: np.ndarray) -> np.ndarray:
        """Gradient at points with components along the last axis."""
        return np.moveaxis(self.grad(np.moveaxis(np.asarray(s, dtype=float), -1, 0)), 0, -1)

    def _check(self, s: np.ndarray) -> None:
        if s.shape[0] != self.d:
            raise DomainError(f"expected {self.d} components on axis 0, got {s.shape[0]}")

    # symmetry ----------------------------------------------------------------
    @property
    def coordinate_even(self) -> bool:
        """Whether ``H`` is even in each coordinate separately."""
        if self.family == "linear_combination":
            return all(t.coordinate_even for t, _ in self.terms)
        if self.family == "quad_form_power":
            m = self.params["M"]
            return bool(np.allclose(m, np.diag(np.diag(m))))
        return True

    def describe(self) -> str:
        if self.family == "linear_combination":
            inner = " + ".join(f"{c!r}*[{t.describe()}]" for t, c in self.terms)
            return f"linear_combination(q={self.q!r}: {inner})"
        ps = ", ".join(f"{k}={np.asarray(v).tolist()!r}" for k, v in self.params.items())
        return f"{self.family}(q={self.q!r}, {ps})"

    # families ----------------------------------------------------------------
    def _eval_power_sum(self, s):
        c = self.params["c"].reshape((-1,) + (1,) * (s.ndim - 1))
        return np.sum(c * np.abs(s) ** self.q, axis=0)

    def _grad_power_sum(self, s):
        c = self.params["c"].reshape((-1,) + (1,) * (s.ndim - 1))
        return self.q * c * _spow(s, self.q - 1)

    def _quad(self, s):
        m = self.params["M"]
        ms = np.tensordot(m, s, axes=(1, 0))
        return np.sum(ms * s, axis=0), ms

    def _eval_quad_form_power(self, s):
        t, _ = self._quad(s)
        return _spow(t, self.q / 2)

    def _grad_quad_form_power(self, s):
        t, ms = self._quad(s)
        at = np.abs(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(at > 0, at ** (self.q / 2 - 1), 0.0)
        return self.q * fac * ms

    def _eval_monomial(self, s):
        a = self.params["alpha"]
        out = np.ones(s.shape[1:])
        for j in range(self.d):
            out = out * np.abs(s[j]) ** a[j]
        return out

    def _grad_monomial(self, s):
        a = self.params["alpha"]
        out = np.empty_like(s)
        for j in range(self.d):
            others = np.ones(s.shape[1:])
            for k in range(self.d):
                if k != j:
                    others = others * np.abs(s[k]) ** a[k]
            nz = s[j] != 0
            with np.errstate(divide="ignore", invalid="ignore"):
                dj = np.where(nz, a[j] * _spow(np.where(nz, s[j], 1.0), a[j] - 1), 0.0)
            out[j] = dj * others
        return out

    @staticmethod
    def _esym(a: np.ndarray, ell: int) -> np.ndarray:
        """Elementary symmetric polynomials e_0..e_ell of the rows of ``a``."""
        e = [np.ones(a.shape[1:])] + [np.zeros(a.shape[1:]) for _ in range(ell)]
        for j in range(a.shape[0]):
            for k in range(ell, 0, -1):
                e[k] = e[k] + a[j] * e[k - 1]
        return np.stack(e)

    def _eval_elem_symmetric(self, s):
        ell = self.params["ell"]
        e = self._esym(np.abs(s), ell)[ell]
        return e ** (self.q / ell)

    def _grad_elem_symmetric(self, s):
        ell = self.params["ell"]
        a = np.abs(s)
        e = self._esym(a, ell)[ell]
        with np.errstate(divide="ignore", invalid="ignore"):
            outer = np.where(e > 0, (self.q / ell) * e ** (self.q / ell - 1), 0.0)
        out = np.empty_like(s)
        for j in range(self.d):
            rest = np.delete(a, j, axis=0)
            de = self._esym(rest, ell - 1)[ell - 1] if ell > 1 else np.ones(s.shape[1:])
            out[j] = outer * de * np.sign(s[j])
        return out

    def _eval_linear_combination(self, s):
        return sum(c * t(s) for t, c in self.terms)

    def _grad_linear_combination(self, s):
        return sum(c * t.grad(s) for t, c in self.terms)


# family constructors --------------------------------------------------------------
def _nonsmooth(name: str, allow: bool, why: str) -> bool:
    if not allow:
        raise DomainError(f"{name}: {why}; pass allow_nonsmooth=True to override")
    log.warning("%s is not C^1: %s", name, why)
    return False


def power_sum(c, q: float, allow_nonsmooth: bool = False) -> HomogeneousFn:
    """``sum_j c_j |s_j|^q``.  C^1 for every ``q > 1``."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    smooth = True
    if q <= 1:
        smooth = _nonsmooth("power_sum", allow_nonsmooth, "degree must exceed 1")
    return HomogeneousFn("power_sum", len(c), float(q), {"c": c}, smooth=smooth)


def quad_form_power(M, q: float, allow_nonsmooth: bool = False) -> HomogeneousFn:
    """``|<Ms,s>|^{(q-2)/2} <Ms,s>`` for symmetric ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1] or not np.allclose(M, M.T, atol=1e-12):
        raise DomainError("quad_form_power needs a symmetric square matrix")
    ev = np.linalg.eigvalsh(M)
    definite = bool(ev.min() > 0 or ev.max() < 0)
    smooth = True
    if q < 2 and not definite:
        smooth = _nonsmooth(
            "quad_form_power", allow_nonsmooth, "degree below 2 with an indefinite form"
        )
    return HomogeneousFn("quad_form_power", M.shape[0], float(q), {"M": M}, smooth=smooth)


def monomial(alpha, allow_nonsmooth: bool = False) -> HomogeneousFn:
    """``prod_j |s_j|^{alpha_j}`` of degree ``sum(alpha)``."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if np.any(alpha < 0):
        raise DomainError("monomial exponents must be nonnegative")
    smooth = True
    if np.any((alpha > 0) & (alpha < 1)):
        smooth = _nonsmooth("monomial", allow_nonsmooth, "an exponent lies in (0, 1)")
    return HomogeneousFn("monomial", len(alpha), float(alpha.sum()), {"alpha": alpha}, smooth=smooth)


def elem_symmetric(d: int, ell: int, q: float, allow_nonsmooth: bool = False) -> HomogeneousFn:
    """``pi_ell(|s_1|, ..., |s_d|)^{q/ell}`` with ``pi_ell`` elementary symmetric.

    The absolute values make the gradient jump across coordinate hyperplanes
    unless ``ell = d`` and ``q/d >= 1``.
    """
    if not 1 <= ell <= d:
        raise DomainError("need 1 <= ell <= d")
    smooth = True
    if not (ell == d and q / d >= 1):
        smooth = _nonsmooth(
            "elem_symmetric", allow_nonsmooth, "gradient jumps across coordinate hyperplanes"
        )
    return HomogeneousFn("elem_symmetric", int(d), float(q), {"ell": int(ell)}, smooth=smooth)


def linear_combination(terms, coeffs) -> HomogeneousFn:
    """``sum_k coeffs[k] * terms[k]``; all terms share dimension and degree."""
    terms = tuple(terms)
    coeffs = tuple(float(c) for c in coeffs)
    if not terms or len(terms) != len(coeffs):
        raise DomainError("need matching nonempty terms and coefficients")
    d, q = terms[0].d, terms[0].q
    for t in terms:
        if t.d != d or abs(t.q - q) > 1e-12:
            raise DomainError("terms must share dimension and degree")
    return HomogeneousFn(
        "linear_combination",
        d,
        q,
        terms=tuple(zip(terms, coeffs)),
        smooth=all(t.smooth for t in terms),
    )


# extrema on the p-sphere -------------------------------------------------------
@dataclass
class SphereExtrema:
    """Max and min of ``H`` on ``{|s|_p = 1}``."""

    M: float
    mu: float
    argmax: np.ndarray
    argmin: np.ndarray
    maximizers: list
    method: dict

    def as_dict(self) -> dict:
        return {
            "M": self.M,
            "mu": self.mu,
            "argmax": self.argmax.tolist(),
            "argmin": self.argmin.tolist(),
            "n_maximizers": len(self.maximizers),
            **{f"method.{k}": v for k, v in self.method.items()},
        }


def _project(s: np.ndarray, p: float) -> np.ndarray:
    return s / p_norm(s, p)


def _ratio_and_grad(H: HomogeneousFn, s: np.ndarray, p: float):
    """``R = H(s)/|s|_p^q`` and its gradient, components on axis 0."""
    nrm = np.sum(np.abs(s) ** p, axis=0)
    hv = H(s)
    hg = H.grad(s)
    scale = nrm ** (-H.q / p)
    r = hv * scale
    g = hg * scale - H.q * r * _spow(s, p - 1) / nrm
    return r, g


def _ascend(H: HomogeneousFn, s: np.ndarray, p: float, sign: float, iters: int) -> tuple[np.ndarray, int]:
    """Vectorised projected gradient ascent of ``sign*R`` from columns of ``s``."""
    s = _project(s, p)
    r, g = _ratio_and_grad(H, s, p)
    r = sign * r
    g = sign * g
    t = np.full(s.shape[1], 0.1)
    used = 0
    for it in range(iters):
        cand = _project(s + t * g / np.maximum(np.linalg.norm(g, axis=0), 1e-300), p)
        rc, gc = _ratio_and_grad(H, cand, p)
        rc = sign * rc
        ok = rc >= r
        s = np.where(ok, cand, s)
        r = np.where(ok, rc, r)
        g = np.where(ok, sign * gc, g)
        t = np.where(ok, np.minimum(t * 1.5, 1.0), t * 0.5)
        used = it + 1
        if np.all(t < 1e-14):
            break
    return s, used


def _scan_points(d: int, p: float, resolution: float) -> np.ndarray:
    if d == 1:
        return np.array([[1.0, -1.0]])
    if d == 2:
        phi = np.arange(0.0, 2 * np.pi, resolution)
        return _project(np.stack([np.cos(phi), np.sin(phi)]), p)
    th = np.arange(0.0, np.pi + resolution / 2, resolution)
    ph = np.arange(0.0, 2 * np.pi, resolution)
    T, P = np.meshgrid(th, ph, indexing="ij")
    s = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)]).reshape(3, -1)
    return _project(s, p)


def _sign_orbit(s: np.ndarray, coordinate_even: bool) -> list[np.ndarray]:
    if coordinate_even:
        out = []
        for signs in itertools.product((1.0, -1.0), repeat=len(s)):
            out.append(s * np.array(signs))
        return out
    return [s, -s]


def _snap(x: np.ndarray, p: float) -> np.ndarray:
    return _project(np.where(np.abs(x) < 1e-9, 0.0, x), p)


def _dedupe(points: list[np.ndarray], p: float, tol: float = 1e-3) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    arr = np.empty((0, len(points[0]) if points else 0))
    for x in points:
        x = _snap(x, p)
        if not arr.size or np.min(np.max(np.abs(arr - x), axis=1)) > tol:
            kept.append(x)
            arr = np.vstack([arr, x])
    kept.sort(key=lambda v: tuple(-v))
    return kept


def extrema_on_p_sphere(
    H: HomogeneousFn,
    p: float,
    starts: int = 200,
    seed: int = 0,
    iters: int = 400,
    scan: bool = True,
) -> SphereExtrema:
    """Global max and min of ``H`` over the unit p-sphere (heuristic).

    Multi-start projected ascent and descent from ``starts`` seeded random
    points plus the signed coordinate vectors.  For ``d = 2`` a scan with
    angular step 1e-3 is added; for ``d = 3`` a 1e-2 angular scan whose best
    points seed further ascent.
    """
    d = H.d
    key = ("extrema", float(p), starts, seed, iters, scan)
    cache = H.__dict__.setdefault("_cache", {})
    if key in cache:
        return cache[key]
    if d == 1:
        pts = np.array([[1.0, -1.0]])
        vals = H(pts)
        imax, imin = int(np.argmax(vals)), int(np.argmin(vals))
        maxers = [pts[:, i] for i in range(2) if vals[i] >= vals[imax] - 1e-12 * (1 + abs(vals[imax]))]
        res = SphereExtrema(
            float(vals[imax]), float(vals[imin]), pts[:, imax], pts[:, imin],
            _dedupe(maxers, p), {"starts": 2, "iterations": 0, "scan_points": 0},
        )
        cache[key] = res
        return res

    rng = np.random.default_rng(seed)
    eye = np.eye(d)
    x0 = np.hstack([rng.standard_normal((d, starts)), eye, -eye])
    scan_pts = np.zeros((d, 0))
    if scan and d <= 3:
        scan_pts = _scan_points(d, p, 1e-3 if d == 2 else 1e-2)
        sv = H(scan_pts)
        order = np.argsort(sv)
        x0 = np.hstack([x0, scan_pts[:, order[-20:]], scan_pts[:, order[:20]]])
    best = {}
    iters_used = 0
    for sign in (1.0, -1.0):
        s, used = _ascend(H, x0.copy(), p, sign, iters)
        iters_used += used
        s = np.hstack([s, scan_pts]) if scan_pts.size else s
        v = H(s)
        i = int(np.argmax(sign * v))
        best[sign] = (s, v, i)
    s_hi, v_hi, i_hi = best[1.0]
    s_lo, v_lo, i_lo = best[-1.0]
    M = float(v_hi[i_hi])
    tol = 1e-6 * (1 + abs(M))
    n_asc = x0.shape[1]
    cand = [s_hi[:, j] for j in np.flatnonzero(v_hi[:n_asc] >= M - tol)]
    if not cand:
        cand = [s_hi[:, i_hi]]
    orbit = []
    for c in cand:
        orbit.extend(_sign_orbit(c, H.coordinate_even))
    maxers = [m for m in _dedupe(orbit, p) if H(m) >= M - tol]
    res = SphereExtrema(
        M=M,
        mu=float(v_lo[i_lo]),
        argmax=_snap(s_hi[:, i_hi], p),
        argmin=_snap(s_lo[:, i_lo], p),
        maximizers=maxers,
        method={
            "starts": int(x0.shape[1]),
            "iterations": int(iters_used),
            "scan_points": int(scan_pts.shape[1]),
            "seed": int(seed),
        },
    )
    cache[key] = res
    return res


def find_good_direction(F: HomogeneousFn, G: HomogeneousFn, p: float, **kw) -> np.ndarray:
    """A maximiser of ``G`` on the unit p-sphere at which ``F > 0``.

    Among all located maximisers (and their sign orbits) the one with the
    largest ``F`` is returned.
    """
    if F.d != G.d:
        raise DomainError("F and G must have the same number of components")
    ext = extrema_on_p_sphere(G, p, **kw)
    good = [(float(F(s)), tuple(s)) for s in ext.maximizers if F(s) > 0]
    if not good:
        raise NoGoodDirection("F <= 0 at every located maximiser of G")
    good.sort(key=lambda t: (-t[0], tuple(-x for x in t[1])))
    return np.array(good[0][1])


def positive_F_bump(F: HomogeneousFn, dom, p: float | None = None, center=None, radius=None) -> np.ndarray:
    """Plateau bump ``(1 - eta(|x-x0|^2/r^2)) sigma`` with ``F(sigma) = M_F``.

    Without ``center`` the node farthest from the exterior is used and ``r``
    is half its distance to the nearest exterior node.

    Returns
    -------
    ndarray
        Field of shape ``(d, *dom.shape)`` with positive ``F``-integral.
    """
    from scipy import ndimage

    from .grid import integrate

    p = F.q if p is None else p
    ext = extrema_on_p_sphere(F, p)
    if not ext.M > 0:
        raise NoPositiveDirection("M_F <= 0")
    sigma = ext.argmax
    if center is None:
        dist = ndimage.distance_transform_edt(dom.mask) * dom.h
        idx = np.unravel_index(int(np.argmax(dist)), dom.shape)
        center = dom.lo + dom.h * np.array(idx)
        if radius is None:
            radius = 0.5 * float(dist[idx])
    if radius is None:
        raise DomainError("radius required when center is given")
    x = dom.node_coords()
    t = np.sum((x - np.asarray(center).reshape((-1,) + (1,) * dom.n)) ** 2, axis=0) / radius**2
    prof = (1.0 - _smooth.smoothstep(t)) * dom.mask
    u = sigma.reshape((-1,) + (1,) * dom.n) * prof
    val = integrate(F(u), dom)
    if not val > 0:
        raise NoPositiveDirection(f"bump integral {val!r} is not positive; refine the grid")
    return u
