"""Extremal functions of the Sobolev inequality and the constants built from them.

The extremal profile is ``U(r) = c (1 + r^{p'})^{-(n-p)/p}`` with
``p' = p/(p-1)``; ``U_eps(y) = eps^{-(n-p)/p} U(y/eps)`` and the cutoff
bubble is ``w_eps = eta(|y|) U_eps(y)`` with a smooth plateau ``eta`` equal
to 1 on ``[0, rho/2]`` and 0 beyond ``rho``.

Every integral here is one-dimensional after passing to polar coordinates and
is evaluated with adaptive quadrature.  Integrals over ``[R, inf)`` are
dropped once an explicit power-law bound on them is below ``1e-13`` of the
total; the bound is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sint

from . import _smooth
from .errors import DomainError, FitFailure, QuadratureFailure

__all__ = [
    "sphere_area",
    "BubbleParams",
    "normalize_bubble",
    "sobolev_constant",
    "b_np",
    "bubble_profile",
    "bubble_gradient",
    "cutoff_bubble",
    "cutoff_bubble_gradient",
    "cutoff_norms",
    "AsymptoticsReport",
    "bubble_asymptotics",
    "ConstantsTable",
    "constant_algebra",
    "epsilon_sharp_probe",
]

_REL = 1e-13


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def _check_np(n: int, p: float) -> None:
    if n < 2 or not 1 < p < n:
        raise DomainError("need n >= 2 and 1 < p < n")


def _quad(fn, a: float, b: float, log: bool = False) -> float:
    """``int_a^b fn(r) dr``, optionally through ``r = e^t``."""
    if log:
        g = lambda t: fn(math.exp(t)) * math.exp(t)  # noqa: E731
        a, b = math.log(a), math.log(b)
    else:
        g = fn
    val, err = sint.quad(g, a, b, epsabs=0.0, epsrel=1e-13, limit=500)
    if not np.isfinite(val) or err > 1e-9 * max(abs(val), 1e-300):
        raise QuadratureFailure(f"quad on [{a}, {b}] error {err:.2e} for value {val:.6e}")
    return val


def _radial(fn, n: int, a: float, b: float) -> float:
    """``omega_{n-1} int_a^b fn(r) r^{n-1} dr`` with breakpoints at decades."""
    if b <= a:
        return 0.0
    g = lambda r: fn(r) * r ** (n - 1)  # noqa: E731
    total = 0.0
    lo = a
    if lo < 1.0:
        hi = min(b, 1.0)
        total += _quad(g, lo, hi)
        lo = hi
    while lo < b:
        hi = min(b, lo * 10.0)
        total += _quad(g, lo, hi, log=True)
        lo = hi
    return sphere_area(n) * total


def _power_tail(coef: float, decay: float, n: int, R: float) -> float:
    """``omega int_R^inf coef r^{-decay} r^{n-1} dr`` for ``decay > n``."""
    return sphere_area(n) * coef * R ** (n - decay) / (decay - n)


def _truncation(coef: float, decay: float, n: int, scale: float, start: float) -> tuple[float, float]:
    """Smallest ``R = start * 2^k`` whose power-law tail is below ``_REL * scale``."""
    R = start
    while _power_tail(coef, decay, n, R) > _REL * scale:
        R *= 2.0
    return R, _power_tail(coef, decay, n, R)


@dataclass
class BubbleParams:
    """Parameters of the extremal family."""

    n: int
    p: float
    c: float
    eps: float = 1.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rho: float = 1.0

    @property
    def pprime(self) -> float:
        return self.p / (self.p - 1)

    @property
    def pstar(self) -> float:
        return self.n * self.p / (self.n - self.p)

    @property
    def k(self) -> float:
        """Decay order ``(n-p)/(p-1)``."""
        return (self.n - self.p) / (self.p - 1)


_C_CACHE: dict = {}


def normalize_bubble(n: int, p: float) -> float:
    """Constant ``c`` with ``||c (1 + r^{p'})^{-(n-p)/p}||_{L^{p*}(R^n)} = 1``."""
    _check_np(n, p)
    key = (n, float(p))
    if key in _C_CACHE:
        return _C_CACHE[key]
    pp = p / (p - 1)
    # U^{p*} = c^{p*} (1 + r^{p'})^{-n} <= c^{p*} r^{-n p'}
    head = _radial(lambda r: (1.0 + r**pp) ** (-n), n, 0.0, 1.0)
    R, tail = _truncation(1.0, n * pp, n, head, 1.0)
    total = head + _radial(lambda r: (1.0 + r**pp) ** (-n), n, 1.0, R)
    if tail > 1e-12 * total:
        raise QuadratureFailure("tail bound too large")
    c = total ** (-(n - p) / (n * p))
    _C_CACHE[key] = c
    return c


def bubble_profile(r, n: int, p: float, eps: float = 1.0) -> np.ndarray:
    """``U_eps(r)``."""
    c = normalize_bubble(n, p)
    pp = p / (p - 1)
    r = np.asarray(r, dtype=float)
    return c * eps ** (-(n - p) / p) * (1.0 + (r / eps) ** pp) ** (-(n - p) / p)


def bubble_gradient(r, n: int, p: float, eps: float = 1.0) -> np.ndarray:
    """Radial derivative ``U_eps'(r)`` (non-positive)."""
    c = normalize_bubble(n, p)
    pp = p / (p - 1)
    r = np.asarray(r, dtype=float)
    s = r / eps
    return (
        -c
        * eps ** (-(n - p) / p - 1)
        * ((n - p) / (p - 1))
        * s ** (pp - 1)
        * (1.0 + s**pp) ** (-(n - p) / p - 1)
    )


def cutoff_bubble(r, n: int, p: float, eps: float, rho: float = 1.0) -> np.ndarray:
    """``w_eps(r) = eta(r) U_eps(r)``."""
    return _smooth.plateau(r, rho) * bubble_profile(r, n, p, eps)


def cutoff_bubble_gradient(r, n: int, p: float, eps: float, rho: float = 1.0) -> np.ndarray:
    """Radial derivative of :func:`cutoff_bubble`."""
    return _smooth.plateau_deriv(r, rho) * bubble_profile(r, n, p, eps) + _smooth.plateau(
        r, rho
    ) * bubble_gradient(r, n, p, eps)


_S_CACHE: dict = {}


def sobolev_constant(n: int, p: float) -> float:
    """Sharp constant ``S`` with ``||u||_{p*}^p <= S ||grad u||_p^p``.

    Computed as ``1 / ||grad U||_p^p`` at the normalised extremal.
    """
    _check_np(n, p)
    key = (n, float(p))
    if key in _S_CACHE:
        return _S_CACHE[key]
    pp = p / (p - 1)
    k = (n - p) / (p - 1)
    c = normalize_bubble(n, p)

    def g(r):
        return c**p * k**p * r**pp * (1.0 + r**pp) ** (-n)

    head = _radial(g, n, 0.0, 1.0)
    # |U'|^p <= c^p k^p r^{p' - n p'}
    R, _ = _truncation(c**p * k**p, n * pp - pp, n, head, 1.0)
    val = head + _radial(g, n, 1.0, R)
    S = 1.0 / val
    _S_CACHE[key] = S
    return S


def b_np(n: int, p: float) -> float:
    """Leading coefficient of ``||w_eps||_p^p``; requires ``n >= p^2``."""
    _check_np(n, p)
    c = normalize_bubble(n, p)
    om = sphere_area(n)
    if abs(n - p * p) <= 1e-12:
        return c**p * om
    if n < p * p:
        raise DomainError("b_{n,p} needs n >= p^2")
    return (
        c**p
        * om
        * (p - 1)
        * math.gamma((n - p * p) / p)
        * math.gamma((n * p - n) / p)
        / (p * math.gamma(n - p))
    )


# cutoff-bubble norms -------------------------------------------------------------
def cutoff_norms(n: int, p: float, eps: float, rho: float = 1.0, gammas=()) -> dict:
    """Norm deviations of ``w_eps`` evaluated without cancellation.

    Returns
    -------
    dict
        ``grad_dev = ||grad w||_p^p - S^{-1}``, ``pstar_deficit = 1 -
        ||w||_{p*}^p``, ``lp = ||w||_p^p``, ``weighted[gamma] = int |y|^gamma
        |grad w|^p`` and ``tail_bound`` (largest dropped tail relative to its
        integral).
    """
    _check_np(n, p)
    pp = p / (p - 1)
    k = (n - p) / (p - 1)
    ps = n * p / (n - p)
    c = normalize_bubble(n, p)
    r0 = rho / 2
    tails = []

    def U(r):
        return float(bubble_profile(r, n, p, eps))

    def dU(r):
        return float(bubble_gradient(r, n, p, eps))

    def eta(r):
        return float(_smooth.plateau(r, rho))

    def deta(r):
        return float(_smooth.plateau_deriv(r, rho))

    # envelopes: (r/eps)-power laws that bound the integrands from above
    def env_grad(_R):
        return (c * k) ** p * eps ** ((n - 1) * pp - n)

    def env_val(_R, q):
        return c**q * eps ** ((n - p) * q * (pp - 1) / p)

    # gradient deviation on the transition layer and beyond rho
    inner = _radial(lambda r: abs(eta(r) * dU(r) + deta(r) * U(r)) ** p - abs(dU(r)) ** p, n, r0, rho)
    scale_g = _radial(lambda r: abs(dU(r)) ** p, n, rho, 4 * rho)
    R, tb = _truncation(env_grad(4 * rho), (n - 1) * pp, n, scale_g, 4 * rho)
    outer = scale_g + _radial(lambda r: abs(dU(r)) ** p, n, 4 * rho, R)
    tails.append(tb / max(outer, 1e-300))
    grad_dev = inner - outer

    # p* deficit: int (1 - eta^{p*}) U^{p*}
    d_in = _radial(lambda r: (1.0 - eta(r) ** ps) * U(r) ** ps, n, r0, rho)
    d_mid = _radial(lambda r: U(r) ** ps, n, rho, 4 * rho)
    R, tb = _truncation(env_val(4 * rho, ps), (n - p) / p * pp * ps, n, d_mid, 4 * rho)
    deficit = d_in + d_mid + _radial(lambda r: U(r) ** ps, n, 4 * rho, R)
    tails.append(tb / max(deficit, 1e-300))
    pstar_deficit = -math.expm1((p / ps) * math.log1p(-deficit))

    # ||w||_p^p over the support of eta
    lp = _radial(lambda r: (eta(r) * U(r)) ** p, n, 0.0, min(eps, r0))
    if eps < r0:
        lp += _radial(lambda r: U(r) ** p, n, eps, r0)
    lp += _radial(lambda r: (eta(r) * U(r)) ** p, n, r0, rho)

    weighted = {}
    for gam in gammas:
        f = lambda r, gam=gam: r**gam * abs(eta(r) * dU(r) + deta(r) * U(r)) ** p  # noqa: E731
        v = _radial(f, n, 0.0, min(eps, r0))
        if eps < r0:
            v += _radial(f, n, eps, r0)
        v += _radial(f, n, r0, rho)
        weighted[float(gam)] = v
    return {
        "grad_dev": grad_dev,
        "pstar_deficit": pstar_deficit,
        "lp": lp,
        "weighted": weighted,
        "tail_bound": max(tails),
    }


@dataclass
class AsymptoticsReport:
    """Fitted against predicted orders over an epsilon sweep."""

    n: int
    p: float
    eps: np.ndarray
    rows: list
    fits: dict

    def table(self) -> list[tuple]:
        return [(k, v["fitted"], v["predicted"], v.get("coefficient")) for k, v in self.fits.items()]


def _slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ coef - y)))
    return float(coef[0]), float(coef[1]), resid


def bubble_asymptotics(
    n: int,
    p: float,
    gammas=None,
    eps_grid=None,
    rho: float = 1.0,
    resid_max: float = 0.5,
) -> AsymptoticsReport:
    """Least-squares decay orders of the cutoff-bubble norm deviations.

    ``gammas`` defaults to ``k-1, k, k+1`` with ``k = (n-p)/(p-1)``.  Fits
    use the four smallest values of ``eps``, where the leading term
    dominates; the ``||w||_p^p`` coefficient uses the whole sweep.  For ``gamma = k`` and for ``n = p^2`` the
    logarithmic factor is divided out before fitting.
    """
    _check_np(n, p)
    k = (n - p) / (p - 1)
    if gammas is None:
        gammas = (k - 1.0, k, k + 1.0)
    eps = np.asarray(eps_grid if eps_grid is not None else 2.0 ** -np.arange(3, 11), float)
    rows = [cutoff_norms(n, p, float(e), rho, gammas) for e in eps]
    le = np.log(eps)
    lab = np.abs(np.log(eps))
    fits: dict = {}

    def record(name, y, pred, extra=None, use=None):
        sel = slice(None) if use is None else use
        s, b, res = _slope(le[sel], y[sel])
        if res > resid_max:
            raise FitFailure(f"{name}: residual {res:.3f}")
        fits[name] = {"fitted": s, "predicted": pred, "residual": res, **(extra or {})}

    tail = slice(-4, None)
    gd = np.array([abs(r["grad_dev"]) for r in rows])
    record("grad_dev", np.log(gd), k, use=tail)
    pd = np.array([r["pstar_deficit"] for r in rows])
    record("pstar_deficit", np.log(pd), n / (p - 1), {"bound_order": float(n)}, use=tail)
    lp = np.array([r["lp"] for r in rows])
    b = b_np(n, p) if n >= p * p - 1e-12 else None
    if b is not None and abs(n - p * p) <= 1e-12:
        record("lp", np.log(lp / lab), p, use=tail)
        coef, _, _ = _slope(lab, lp / eps**p)
        fits["lp"].update({"coefficient": coef, "b_np": b, "ratio_last": float(lp[-1] / (eps[-1] ** p * lab[-1]))})
    elif b is None:
        # n < p^2: the tail |y|^{-p(n-p)/(p-1)} is not integrable, giving order eps^k
        record("lp", np.log(lp), k, {"case": "tail"}, use=tail)
    else:
        record("lp", np.log(lp), p, use=tail)
        if b is not None:
            # lp / eps^p = b + O(eps^{k-p}); extrapolate linearly in eps^{k-p}
            c1, c0, _ = _slope(eps ** (k - p), lp / eps**p)
            fits["lp"].update({"coefficient": c0, "b_np": b})
    for gam in gammas:
        w = np.array([r["weighted"][float(gam)] for r in rows])
        if abs(gam - k) <= 1e-12:
            record(f"weighted[{gam:g}]", np.log(w / lab), gam, {"case": "equal"}, use=tail)
        elif gam < k:
            record(f"weighted[{gam:g}]", np.log(w), gam, {"case": "below"}, use=tail)
        else:
            record(f"weighted[{gam:g}]", np.log(w), k, {"case": "above"}, use=tail)
    return AsymptoticsReport(n, p, eps, rows, fits)


# constant algebra ------------------------------------------------------------------
@dataclass
class ConstantsTable:
    """Sharp constants for one configuration, each with a provenance note."""

    n: int
    p: float
    S: float
    c_np: float
    b_np: float | None
    m_A: float | None = None
    M_G: float | None = None
    S_M: dict = field(default_factory=dict)
    S_MG: float | None = None
    N: float | None = None
    provenance: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"n": self.n, "p": self.p, "S": self.S, "S_inv": 1.0 / self.S, "c_np": self.c_np}
        for key in ("b_np", "m_A", "M_G", "S_MG", "N"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v
        if self.N is not None:
            out["N_inv"] = 1.0 / self.N
        for k, v in self.S_M.items():
            out[f"S_M[{k}]"] = v
        for k, v in self.provenance.items():
            out[f"provenance.{k}"] = v
        return out


def S_of_matrix(M, n: int, p: float) -> float:
    """``S(M) = det(M)^{-p/(2n)} S``."""
    return float(np.linalg.det(np.asarray(M, float))) ** (-p / (2 * n)) * sobolev_constant(n, p)


def constant_algebra(n: int, p: float, M=None, G=None, A=None, dom=None) -> ConstantsTable:
    """Populate :class:`ConstantsTable` from ``S``, determinants and ``M_G``.

    With ``M`` the table holds ``S(M)`` (and ``S(M;G)`` when ``G`` is given);
    with ``A`` and ``dom`` it holds ``m_A`` and ``N(A;G)``.
    """
    from .fields import det_min
    from .homog import extrema_on_p_sphere

    S = sobolev_constant(n, p)
    tab = ConstantsTable(
        n=n,
        p=p,
        S=S,
        c_np=normalize_bubble(n, p),
        b_np=b_np(n, p) if n >= p * p - 1e-12 else None,
        provenance={"S": "radial quadrature at the extremal", "c_np": "radial quadrature"},
    )
    pstar = n * p / (n - p)
    if G is not None:
        if abs(G.q - pstar) > 1e-12:
            raise DomainError("G must have degree p*")
        tab.M_G = extrema_on_p_sphere(G, p).M
        tab.provenance["M_G"] = "multi-start ascent on the unit p-sphere"
    if M is not None:
        tab.S_M["M"] = S_of_matrix(M, n, p)
        tab.provenance["S_M"] = "det(M)^{-p/2n} S"
        if tab.M_G is not None:
            tab.S_MG = tab.M_G ** (p / pstar) * tab.S_M["M"]
    if A is not None and dom is not None:
        tab.m_A, x0 = det_min(A, dom)
        tab.provenance["m_A"] = f"lattice scan, minimiser {np.round(x0, 12).tolist()}"
        if tab.M_G is not None:
            tab.N = tab.m_A ** (-p / (2 * n)) * tab.M_G ** (p / pstar) * S
            tab.provenance["N"] = "m_A^{-p/2n} M_G^{p/p*} S"
    return tab


def epsilon_sharp_probe(model, probes, N: float, eps_list) -> list[tuple[float, float]]:
    """Smallest ``C_eps`` making ``Psi^{p/p*} <= (N + eps) W + C_eps ||u||_p^p`` hold on ``probes``.

    The inequality is affine in ``C_eps``, so the smallest admissible value is
    the maximum over probes of ``(Psi^{p/p*} - (N+eps) W) / ||u||_p^p``,
    clipped at zero.
    """
    p, ps = model.p, model.pstar
    data = []
    for u in probes:
        g = model.G_int(u)
        lhs = max(g, 0.0) ** (p / ps)
        data.append((lhs, model.wA(u), model.lp(u)))
    out = []
    for e in eps_list:
        need = max((lhs - (N + e) * w) / lp for lhs, w, lp in data if lp > 0)
        out.append((float(e), float(max(need, 0.0))))
    return out
