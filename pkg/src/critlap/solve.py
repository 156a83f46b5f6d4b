"""Constrained minimisation of the energy quotient and the existence certificate.

The quotient ``Q = Phi / Psi^{p/p*}`` is minimised by :func:`minimize_Q` from a
fixed menu of starting fields.  Upper bounds on ``K^{-1} = inf Q`` also come
from explicit test families (interior bubbles, boundary-singular bubbles and
the eigenfield along a maximising direction of ``G``).  An existence verdict
is issued only when the best bound clears ``N^{-1}`` by the configured margin.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from . import _smooth
from .bubbles import bubble_profile, constant_algebra
from .energy import EnergyModel, coercivity_check
from .errors import (
    ChecklistFailure,
    DomainError,
    EmptySigmaInterval,
    Inconsistent,
    NoFeasibleInit,
    NoGoodDirection,
    NotCoercive,
    ResidualTooLarge,
    SupportOverflow,
)
from .fields import MatrixField, check_expansion, validate_assumptions
from .grid import GridDomain, cell_average
from .homog import HomogeneousFn, extrema_on_p_sphere, find_good_direction, positive_F_bump
from .optimize import descend
from .spectra import lambda1, make_preconditioner, positive_start

__all__ = [
    "MinimizeResult",
    "Certificate",
    "minimize_Q",
    "default_inits",
    "concentration_radius",
    "concentration_diagnostics",
    "interior_bubble_family",
    "interior_bubble_sweep",
    "sigma_interval",
    "bubble_center",
    "boundary_singular_family",
    "lambda_star_lower_bound",
    "scale_to_solution",
    "discrete_residual",
    "existence_certificate",
]

log = logging.getLogger(__name__)


@dataclass
class MinimizeResult:
    """Best constrained minimiser found over all starts."""

    u: np.ndarray
    K_inv_estimate: float
    psi: float
    residual: float
    converged: bool
    iterations: int
    trace: list
    restarts: list
    label: str

    def as_dict(self) -> dict:
        out = {
            "K_inv_estimate": self.K_inv_estimate,
            "psi": self.psi,
            "residual": self.residual,
            "converged": self.converged,
            "iterations": self.iterations,
            "best_start": self.label,
        }
        for r in self.restarts:
            out[f"start.{r['label']}"] = r["value"]
        vals = [r["value"] for r in self.restarts]
        out["restart_spread"] = float(max(vals) - min(vals))
        return out


@dataclass
class Certificate:
    """Existence / nonexistence / inconclusive verdict with its evidence."""

    kind: str
    N_value: float | None = None
    K_inv_upper_bound: float | None = None
    margin: float | None = None
    witness: dict = field(default_factory=dict)
    checklist: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    witness_field: np.ndarray | None = field(default=None, repr=False)
    minimizer: MinimizeResult | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        for key in ("N_value", "K_inv_upper_bound", "margin"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v
        if self.N_value:
            out["N_inv"] = 1.0 / self.N_value
        for group in ("witness", "checklist", "tolerances", "values"):
            for k, v in getattr(self, group).items():
                out[f"{group}.{k}"] = v
        return out


# minimisation ----------------------------------------------------------------------
def _quotient_fun(model: EnergyModel):
    dom, d, p, ps = model.dom, model.d, model.p, model.pstar
    r = p / ps

    def fun(x):
        u = dom.embed(x, d)
        psi = model.psi(u)
        if not psi > 0:
            return np.inf, np.zeros_like(x)
        W, gW = model.wA_and_grad(u)
        phi = W - model.F_int(u)
        gphi = gW - model.F_grad(u)
        gpsi = model.psi_grad(u)
        q = phi / psi**r
        g = gphi / psi**r - r * phi * psi ** (-r - 1) * gpsi
        return q, dom.restrict(g)

    def normalize(x):
        psi = model.psi(dom.embed(x, d))
        return x / psi ** (1.0 / ps)

    return fun, normalize


def minimize_Q(
    model: EnergyModel,
    inits: list,
    lam1: float | None = None,
    tol: float = 1e-7,
    maxiter: int = 1500,
) -> MinimizeResult:
    """Minimise ``Q`` over fields with ``Psi = 1`` from each start; keep the best.

    Parameters
    ----------
    inits
        List of ``(label, field)`` pairs.
    lam1
        ``lambda_1(A, p)``; when given, coercivity ``M_F < lambda_1`` is enforced.

    Raises
    ------
    NotCoercive
        If ``M_F >= lambda_1``.
    NoFeasibleInit
        If no start has ``Psi > 0``.
    """
    if lam1 is not None and not coercivity_check(model.F, lam1, model.p):
        raise NotCoercive("M_F >= lambda_1(A, p)")
    fun, normalize = _quotient_fun(model)
    P = make_preconditioner(model)
    dom = model.dom
    runs = []
    for label, u0 in inits:
        u0 = np.asarray(u0, float) * dom.mask
        if not model.psi(u0) > 0:
            log.info("start %s skipped: Psi <= 0", label)
            continue
        res = descend(
            fun,
            dom.restrict(u0),
            normalize,
            P,
            stop=lambda f, r: r <= tol * (1.0 + abs(f)),
            maxiter=maxiter,
        )
        runs.append((label, res))
    if not runs:
        raise NoFeasibleInit("no start has a positive G-integral")
    label, best = min(runs, key=lambda t: t[1].value)
    u = dom.embed(best.x, model.d)
    return MinimizeResult(
        u=u,
        K_inv_estimate=float(model.phi(u)),
        psi=float(model.psi(u)),
        residual=best.residual,
        converged=best.converged,
        iterations=best.iterations,
        trace=list(best.history),
        restarts=[
            {"label": lb, "value": float(r.value), "iterations": r.iterations, "converged": r.converged}
            for lb, r in runs
        ],
        label=label,
    )


def default_inits(
    model: EnergyModel,
    x0=None,
    s=None,
    eigenfield: np.ndarray | None = None,
    seed: int = 0,
    bubble_eps=(0.25, 0.1),
) -> list:
    """The fixed start menu: bubbles at ``x0``, eigenfield along ``s``, F-bump, random."""
    dom, d = model.dom, model.d
    G = model.G
    if s is None:
        s = extrema_on_p_sphere(G, model.p).argmax
    if x0 is None:
        x0 = bubble_center(model.A, dom)[1]
    inits = []
    delta = _support_radius(model.A, x0, dom)
    for e in bubble_eps:
        try:
            inits.append((f"bubble[{e:g}]", interior_bubble_family(model.A, x0, s, e * delta, dom, model.p, delta)))
        except SupportOverflow:
            pass
    if eigenfield is not None:
        inits.append(("eigenfield", np.asarray(s).reshape((-1,) + (1,) * dom.n) * eigenfield[0]))
    if model.F is not None and extrema_on_p_sphere(model.F, model.p).M > 0:
        try:
            inits.append(("F-bump", positive_F_bump(model.F, dom, model.p)))
        except Exception as exc:  # noqa: BLE001 - the bump is optional
            log.info("F-bump start skipped: %s", exc)
    rng = np.random.default_rng(seed)
    prof = positive_start(dom, rng, 1)[0]
    inits.append(("random", np.asarray(s).reshape((-1,) + (1,) * dom.n) * prof * (1 + 0.5 * rng.random((d,) + dom.shape))))
    return inits


def concentration_radius(u: np.ndarray, model: EnergyModel, frac: float = 0.5, ball_h: float = 2.0) -> dict:
    """Half-mass radius of ``G(u)`` about its peak and the mass fraction in ``B(peak, ball_h * h)``."""
    dom = model.dom
    ub = cell_average(u * dom.mask, dom)
    dens = np.where(dom.cell_mask, model.G(ub), 0.0)
    idx = np.unravel_index(int(np.argmax(dens)), dom.shape)
    c = dom.lo + dom.h * (np.array(idx) + 0.5)
    x = dom.cell_centers()
    r = np.sqrt(np.sum((x - c.reshape((-1,) + (1,) * dom.n)) ** 2, axis=0))[dom.cell_mask]
    w = dens[dom.cell_mask]
    order = np.argsort(r, kind="stable")
    cum = np.cumsum(w[order])
    k = int(np.searchsorted(cum, frac * cum[-1]))
    inner = float(w[r <= ball_h * dom.h + 1e-12].sum() / cum[-1])
    return {"h": dom.h, "center": c.tolist(), "r50": float(r[order][min(k, len(r) - 1)]), "mass_in_ball": inner}


def concentration_diagnostics(levels: list, threshold: float = 0.3) -> dict:
    """Fit ``r50 ~ h^a`` across refinement levels; ``a > threshold`` flags mass collapse.

    A minimiser that is attained keeps its half-mass radius as ``h -> 0``
    (``a`` near 0); a minimising sequence concentrating at grid scale has
    ``a`` near 1.
    """
    hs = np.array([lv["h"] for lv in levels], float)
    rs = np.array([lv["r50"] for lv in levels], float)
    if len(hs) < 2:
        raise DomainError("need at least two refinement levels")
    a = float(np.polyfit(np.log(hs), np.log(rs), 1)[0])
    out = {"exponent": a, "threshold": threshold, "collapse": bool(a > threshold)}
    for lv in levels:
        out[f"r50[{lv['h']:.6g}]"] = lv["r50"]
        out[f"mass_in_ball[{lv['h']:.6g}]"] = lv["mass_in_ball"]
    return out


# test families -----------------------------------------------------------------------
def _transform(A: MatrixField, x0) -> np.ndarray:
    """``P`` with ``P A(x0) P^T = I``."""
    a0 = A(np.asarray(x0, float)[None])[0]
    evals, evecs = np.linalg.eigh(0.5 * (a0 + a0.T))
    return np.diag(evals**-0.5) @ evecs.T


def bubble_center(A: MatrixField, dom: GridDomain, rtol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Interior node minimising ``det A``; near-ties go to the node with the widest cutoff ball."""
    pts = dom.interior_points()
    dets = np.linalg.det(A(pts))
    m = float(dets.min())
    cand = np.flatnonzero(dets <= m + rtol * abs(m))
    if len(cand) == 1:
        return m, pts[cand[0]]
    from scipy import ndimage

    dist = ndimage.distance_transform_edt(dom.mask)[dom.mask]
    return m, pts[cand[int(np.argmax(dist[cand]))]]


def _support_radius(A: MatrixField, x0, dom: GridDomain) -> float:
    """Largest ``delta`` (to within a step) such that ``P^{-1} B(0, delta)`` sits in the mask."""
    P = _transform(A, x0)
    x = dom.node_coords().reshape(dom.n, -1).T - np.asarray(x0, float)
    y = np.linalg.norm(x @ P.T, axis=1)
    outside = ~dom.mask.ravel()
    return float(np.min(y[outside])) * (1.0 - 1e-9)


def interior_bubble_family(
    A: MatrixField, x0, s, eps: float, dom: GridDomain, p: float, delta: float, check: bool = True
) -> np.ndarray:
    """``u(x) = s * w_eps(P (x - x0))`` with cutoff radius ``delta`` in the ``P``-frame.

    Raises
    ------
    SupportOverflow
        If a node with ``|P(x - x0)| < delta`` lies outside the mask.
    """
    P = _transform(A, x0)
    x = dom.node_coords().reshape(dom.n, -1).T - np.asarray(x0, float)
    r = np.linalg.norm(x @ P.T, axis=1).reshape(dom.shape)
    inside = r < delta
    if check and np.any(inside & ~dom.mask):
        raise SupportOverflow(f"cutoff support of radius {delta:g} leaves the domain")
    w = _smooth.plateau(r, delta) * bubble_profile(r, dom.n, p, eps)
    w = w * dom.mask
    return np.asarray(s, float).reshape((-1,) + (1,) * dom.n) * w


def interior_bubble_sweep(model: EnergyModel, x0, s, delta: float, eps_list) -> list[dict]:
    """Quotient of the interior bubble family over a list of scales."""
    out = []
    for e in eps_list:
        u = interior_bubble_family(model.A, x0, s, e, model.dom, model.p, delta)
        rep = model.report(u)
        out.append({"eps": float(e), "Q": rep.quotient, "phi": rep.phi, "psi": rep.psi, "field": u})
    return out


def sigma_interval(theta: float, gamma: float, n: int, p: float) -> tuple[float, float]:
    """Open interval of admissible ``sigma``: ``max{theta p*, theta p(n-p)/(n-p^2)} < p sigma < gamma``."""
    if not 1 < p < np.sqrt(n):
        raise EmptySigmaInterval(f"need 1 < p < sqrt(n); got p={p}, n={n}")
    if theta < 1:
        raise EmptySigmaInterval("theta must be >= 1")
    ps = n * p / (n - p)
    lo = max(theta * ps, theta * p * (n - p) / (n - p * p)) / p
    hi = gamma / p
    if not lo < hi:
        raise EmptySigmaInterval(f"empty interval ({lo:g}, {hi:g})")
    return lo, hi


def cusp_delta(theta: float) -> float:
    """Radius factor with ``B((0, r), delta r^theta)`` inside ``{y > |x|^{1/theta}}`` for ``0 < r <= 1/2``."""
    return 0.5 ** (theta + 1)


def boundary_singular_family(
    theta: float,
    gamma: float,
    n: int,
    p: float,
    i: int,
    dom: GridDomain,
    s,
    r1: float = 0.5,
    A: MatrixField | None = None,
) -> tuple[np.ndarray, dict]:
    """Bubble of scale ``eps_i^sigma`` cut off at radius ``delta' eps_i^theta`` about ``y_i``.

    The centres are ``y_i = (0, ..., 0, r1 2^{-i})`` approaching the cusp tip
    at the origin, so ``eps_i = |y_i|``.  ``sigma`` is the midpoint of
    :func:`sigma_interval`.  With ``A`` given, the field is composed with the
    map ``P`` of ``A(0)``.

    Returns
    -------
    field, meta
        ``meta`` holds ``sigma``, ``eps_i``, the centre, the radius and a
        containment flag for the support.
    """
    lo, hi = sigma_interval(theta, gamma, n, p)
    sigma = 0.5 * (lo + hi)
    eps_i = r1 * 2.0**-i
    yi = np.zeros(n)
    yi[-1] = eps_i
    P = np.eye(n) if A is None else _transform(A, np.zeros(n))
    if A is not None:
        evals = np.linalg.eigvalsh(A(np.zeros((1, n)))[0])
        rprime = cusp_delta(theta) * evals[0] ** (theta / 2) / evals[-1] ** 0.5
    else:
        rprime = cusp_delta(theta)
    radius = rprime * eps_i**theta
    x = dom.node_coords().reshape(n, -1).T
    y = x @ P.T
    r = np.linalg.norm(y - yi @ P.T, axis=1).reshape(dom.shape)
    inside = r < radius
    contained = bool(not np.any(inside & ~dom.mask))
    scale = eps_i**sigma
    w = _smooth.plateau(r, radius) * bubble_profile(r, n, p, scale) * dom.mask
    u = np.asarray(s, float).reshape((-1,) + (1,) * n) * w
    meta = {
        "sigma": sigma,
        "sigma_interval": (lo, hi),
        "eps_i": eps_i,
        "bubble_scale": scale,
        "cutoff_radius": radius,
        "center": yi.tolist(),
        "contained": contained,
        "support_nodes": int(inside.sum()),
    }
    if not contained:
        raise SupportOverflow(f"support of member {i} leaves the cusp domain")
    return u, meta


def lambda_star_lower_bound(
    A: MatrixField, dom: GridDomain, x0, C0: float, gamma: float, p: float, K0: float, lam1: float | None = None
) -> dict:
    """Certified member ``C0 / K0^p`` of the admissible set, with ``lambda_1`` as upper end.

    Raises
    ------
    ChecklistFailure
        If the lower expansion check fails for ``(C0, gamma)``.
    Inconsistent
        If the bound is not below ``lam1``.
    """
    chk = check_expansion(A, x0, C0, gamma, dom, p, "lower")
    if not chk.holds:
        raise ChecklistFailure("lower-expansion", f"max violation {chk.max_violation:.3e}")
    bound = C0 / K0**p
    out = {"lambda_star_lower": bound, "expansion_violation": chk.max_violation}
    if lam1 is not None:
        out["lambda1"] = lam1
        if not bound < lam1:
            raise Inconsistent(f"lower bound {bound:g} is not below lambda_1 = {lam1:g}")
    return out


# rescaling -------------------------------------------------------------------------------
def discrete_residual(w: np.ndarray, model: EnergyModel) -> dict:
    """Residual of ``-L w - f(w) - g(w) = 0`` in the dual stiffness norm.

    The residual vector is ``grad Phi(w)/p - grad Psi(w)/p*`` on interior
    nodes; its size is reported relative to the principal part
    ``grad W(w)/p``.  Norms are ``sqrt(r . K^{-1} r)`` with ``K`` the
    stiffness matrix of the coefficient.
    """
    dom, p, ps = model.dom, model.p, model.pstar
    _, gW = model.wA_and_grad(w)
    gF = model.F_grad(w)
    gG = model.G_grad(w)
    res = dom.restrict(gW / p - gF / p - gG / ps)
    main = dom.restrict(gW / p)
    P = make_preconditioner(model)
    K = P.K if hasattr(P, "K") else None

    def dual(v):
        z, info = spla.cg(K, v, M=spla.LinearOperator(K.shape, matvec=P), rtol=1e-10, maxiter=500)
        return float(np.sqrt(max(np.dot(v, z), 0.0)))

    rn, mn = dual(res), dual(main)
    return {"residual": rn, "principal": mn, "relative": rn / mn if mn > 0 else np.inf}


def scale_to_solution(res: MinimizeResult, model: EnergyModel, tol: float = 0.05) -> tuple[np.ndarray, dict]:
    """Rescale a minimiser on ``Psi = 1`` into a solution of the discrete equation.

    At a constrained minimiser ``grad Phi = mu grad Psi`` with ``mu = p k / p*``
    and ``k = Phi(u*)``.  The field ``c u*`` solves
    ``grad Phi / p = grad Psi / p*`` when ``c^{p* - p} = k``.

    Raises
    ------
    ResidualTooLarge
        If the relative dual residual exceeds ``tol``.
    """
    k = res.K_inv_estimate
    if not k > 0:
        raise DomainError("rescaling needs a positive energy level")
    c = k ** (1.0 / (model.pstar - model.p))
    w = c * res.u
    info = discrete_residual(w, model)
    info["scale"] = c
    if info["relative"] > tol:
        raise ResidualTooLarge(f"relative residual {info['relative']:.3e} exceeds {tol:g}")
    return w, info


# existence certificate ---------------------------------------------------------------------
def existence_certificate(
    model: EnergyModel,
    margin: float = 0.02,
    lam1_result=None,
    restarts_lambda: int = 1,
    seed: int = 0,
    minimize: bool = True,
    minimize_maxiter: int = 1500,
    minimize_tol: float = 1e-7,
    bubble_eps=None,
    boundary: dict | None = None,
    upper_expansion: dict | None = None,
) -> Certificate:
    """Compare the best upper bound on ``K^{-1}`` with ``N^{-1}``.

    The bound is the minimum over the constrained minimiser, the interior
    bubble sweep at the ``det A`` minimiser, the eigenfield along a maximiser
    of ``G`` and, when ``boundary`` is given, a boundary-singular sweep.
    The verdict is ``existence`` iff the bound is below ``N^{-1} (1 - margin)``
    and every hypothesis holds; otherwise ``inconclusive``.

    Raises
    ------
    ChecklistFailure
        When ellipticity, the degree of ``F`` or ``G``, positivity of ``G`` or
        coercivity fails.
    """
    dom, p, A, F, G = model.dom, model.p, model.A, model.F, model.G
    n = dom.n
    checklist: dict = {}
    values: dict = {}
    if G is None:
        raise ChecklistFailure("H2", "G is required")
    try:
        tau, lam = validate_assumptions(A, dom)
    except Exception as exc:
        raise ChecklistFailure("A1-A3", str(exc)) from exc
    checklist["A1-A3"] = True
    values["tau"], values["Lambda"] = tau, lam
    if F is not None and abs(F.q - p) > 1e-12:
        raise ChecklistFailure("H1", "deg F != p")
    if abs(G.q - model.pstar) > 1e-12:
        raise ChecklistFailure("H2", "deg G != p*")
    checklist["H1"] = F is None or F.smooth
    gext = extrema_on_p_sphere(G, p)
    if not gext.mu > 0:
        raise ChecklistFailure("H2", f"G is not positive on the sphere (min {gext.mu:g})")
    checklist["H2"] = G.smooth
    MF = extrema_on_p_sphere(F, p).M if F is not None else 0.0
    muF = extrema_on_p_sphere(F, p).mu if F is not None else 0.0
    values["M_F"], values["mu_F"], values["M_G"], values["mu_G"] = MF, muF, gext.M, gext.mu
    if lam1_result is None:
        lam1_result = lambda1(A, p, dom, restarts=restarts_lambda, seed=seed)
    lam1 = lam1_result.value
    values["lambda1"] = lam1
    if not MF < lam1:
        raise ChecklistFailure("coercivity", f"M_F = {MF:g} >= lambda_1 = {lam1:g}")
    checklist["coercivity"] = True
    checklist["M_F>0"] = bool(MF > 0)

    tab = constant_algebra(n, p, G=G, A=A, dom=dom)
    N = tab.N
    values["m_A"] = tab.m_A
    x0 = bubble_center(A, dom)[1]
    values["x0"] = np.round(x0, 12).tolist()
    values["S_inv"] = 1.0 / tab.S
    try:
        s = find_good_direction(F, G, p) if F is not None else gext.argmax
        checklist["good_direction"] = F is not None
    except NoGoodDirection:
        s = gext.argmax
        checklist["good_direction"] = False
    if upper_expansion is not None:
        chk = check_expansion(
            A, x0, upper_expansion["C0"], upper_expansion["gamma"], dom, p, "upper", upper_expansion.get("delta")
        )
        checklist["upper_expansion"] = chk.holds
        values["upper_expansion_violation"] = chk.max_violation

    candidates = []
    eig_u = np.asarray(s).reshape((-1,) + (1,) * n) * lam1_result.field[0]
    q = model.quotient(eig_u)
    if q is not None:
        candidates.append(("eigenfield", q, eig_u, {}))
    delta = _support_radius(A, x0, dom)
    values["bubble_delta"] = delta
    if bubble_eps is None:
        bubble_eps = [delta * 2.0**-k for k in range(1, 8) if delta * 2.0**-k >= 2 * dom.h]
    best_sweep = None
    for row in interior_bubble_sweep(model, x0, s, delta, bubble_eps):
        values[f"bubble.Q[{row['eps']:.6g}]"] = row["Q"]
        if row["Q"] is not None and (best_sweep is None or row["Q"] < best_sweep["Q"]):
            best_sweep = row
    if best_sweep is not None:
        candidates.append(("interior-bubble", best_sweep["Q"], best_sweep["field"], {"eps": best_sweep["eps"], "delta": delta}))
    if boundary is not None:
        for i in boundary.get("indices", range(1, 4)):
            try:
                u, meta = boundary_singular_family(
                    boundary["theta"], boundary["gamma"], n, p, i, dom, s, boundary.get("r1", 0.5), A
                )
            except SupportOverflow:
                continue
            qi = model.quotient(u)
            values[f"boundary.Q[{i}]"] = qi
            if qi is not None:
                candidates.append((f"boundary-singular[{i}]", qi, u, meta))
    mres = None
    if minimize:
        inits = default_inits(model, x0, s, lam1_result.field, seed)
        mres = minimize_Q(model, inits, lam1, tol=minimize_tol, maxiter=minimize_maxiter)
        candidates.append(("minimize_Q", mres.K_inv_estimate, mres.u, mres.as_dict()))
    label, bound, u_w, meta = min(candidates, key=lambda c: c[1])
    wrep = model.report(u_w)
    passed = all(bool(v) for v in checklist.values())
    fires = bound < (1.0 / N) * (1.0 - margin)
    kind = "existence" if (fires and passed) else "inconclusive"
    witness = {"family": label, "quotient": wrep.quotient}
    for k, v in meta.items():
        if isinstance(v, (int, float, str, bool)):
            witness[k] = v
    for lb, qv, _, _ in candidates:
        values[f"bound.{lb}"] = qv
    return Certificate(
        kind=kind,
        N_value=N,
        K_inv_upper_bound=bound,
        margin=margin,
        witness=witness,
        checklist=checklist,
        tolerances={"h": dom.h, "margin": margin, "minimize_tol": minimize_tol},
        values=values,
        witness_field=u_w,
        minimizer=mres,
    )
