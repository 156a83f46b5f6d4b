"""Discrete energies on a masked lattice and their exact gradients.

All functionals act on nodal fields ``u`` of shape ``(d, *dom.shape)``:

* ``W(u) = sum_j sum_cells <A grad u_j, grad u_j>^{p/2} h^n``
* ``Fint(u) = sum_cells F(ubar) h^n`` with ``ubar`` the cell average of the
  corner values (midpoint rule), and ``Gint(u)`` likewise
* ``Phi = W - Fint``, ``Psi = Gint`` and ``Q = Phi / Psi^{p/p*}``

Gradients are with respect to the nodal values (so they carry the quadrature
weight) and vanish off the mask.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .fields import MatrixField
from .grid import GridDomain, cell_average, cell_average_adjoint, gradient, gradient_adjoint
from .homog import HomogeneousFn

__all__ = [
    "EPS_G",
    "critical_exponent",
    "EnergyModel",
    "EnergyReport",
    "wA_norm_p",
    "report",
    "grad_phi",
    "grad_psi",
    "p_difference",
    "coercivity_check",
]

EPS_G = 1e-10


def critical_exponent(n: int, p: float) -> float:
    """``p* = n p / (n - p)``."""
    if not 1 < p < n:
        raise ValueError("need 1 < p < n")
    return n * p / (n - p)


@dataclass
class EnergyReport:
    """Values of the energy functionals at one field."""

    wA_norm_p: float
    F_integral: float
    G_integral: float
    phi: float
    psi: float
    quotient: float | None

    def as_dict(self) -> dict:
        return asdict(self)


class EnergyModel:
    """Bundle of the discrete functionals for fixed ``(dom, A, p, F, G)``.

    Parameters
    ----------
    eps_g
        Regularisation inside the gradient of ``W`` when ``p < 2``:
        ``(<A g,g> + eps_g^2)^{(p-2)/2}`` replaces ``<A g,g>^{(p-2)/2}``.
        Energies themselves are never regularised.
    quadrature
        ``"midpoint"`` evaluates zero-order integrands at cell averages;
        ``"nodes"`` uses the lumped nodal rule.
    """

    def __init__(
        self,
        dom: GridDomain,
        A: MatrixField,
        p: float,
        F: HomogeneousFn | None = None,
        G: HomogeneousFn | None = None,
        d: int | None = None,
        eps_g: float = EPS_G,
        quadrature: str = "midpoint",
    ) -> None:
        if quadrature not in ("midpoint", "nodes"):
            raise ValueError("quadrature must be 'midpoint' or 'nodes'")
        self.quadrature = quadrature
        self.dom = dom
        self.A = A
        self.p = float(p)
        self.F = F
        self.G = G
        self.d = d if d is not None else (F.d if F is not None else (G.d if G is not None else 1))
        self.eps_g = eps_g
        self.pstar = critical_exponent(dom.n, p) if p < dom.n else None
        self._cmask = dom.cell_mask
        self._nmask = dom.mask

    @property
    def coef(self):
        return self.A.cells(self.dom)

    # anisotropic norm ----------------------------------------------------------
    def _quad(self, u: np.ndarray):
        g = gradient(u, self.dom)
        ag = self.coef.apply(g)
        q = np.sum(g * ag, axis=1)
        return g, ag, q

    def wA(self, u: np.ndarray) -> float:
        _, _, q = self._quad(u)
        return float(np.sum(np.maximum(q[:, self._cmask], 0.0) ** (self.p / 2)) * self.dom.dV)

    def wA_and_grad(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        g, ag, q = self._quad(u)
        q = np.maximum(q, 0.0) * self._cmask
        val = float(np.sum(q[:, self._cmask] ** (self.p / 2)) * self.dom.dV)
        if self.p == 2:
            w = np.ones_like(q)
        elif self.p > 2:
            w = q ** ((self.p - 2) / 2)
        else:
            w = (q + self.eps_g**2) ** ((self.p - 2) / 2)
        flux = (self.p * self.dom.dV) * w[:, None] * ag
        grad = gradient_adjoint(flux, self.dom) * self._nmask
        return val, grad

    def gradient_power(self, u: np.ndarray) -> float:
        """``sum_j sum_cells |grad u_j|^p h^n`` (the ``A = I`` norm)."""
        g = gradient(u, self.dom)
        q = np.sum(g * g, axis=1)
        return float(np.sum(q[:, self._cmask] ** (self.p / 2)) * self.dom.dV)

    # zero-order terms -------------------------------------------------------------
    def _points(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.quadrature == "nodes":
            return u, self._nmask
        return cell_average(u * self._nmask, self.dom), self._cmask

    def _pull(self, v: np.ndarray) -> np.ndarray:
        """Map a gradient with respect to quadrature-point values back to nodes."""
        if self.quadrature == "nodes":
            return v * (self._nmask * self.dom.dV)
        return cell_average_adjoint(v * (self._cmask * self.dom.dV), self.dom) * self._nmask

    def _zero_order(self, H: HomogeneousFn | None, u: np.ndarray) -> float:
        if H is None:
            return 0.0
        v, m = self._points(u)
        return float(np.sum(H(v)[m]) * self.dom.dV)

    def _zero_order_grad(self, H: HomogeneousFn | None, u: np.ndarray) -> np.ndarray:
        if H is None:
            return np.zeros_like(u)
        v, _ = self._points(u)
        return self._pull(H.grad(v))

    def F_int(self, u):
        return self._zero_order(self.F, u)

    def G_int(self, u):
        return self._zero_order(self.G, u)

    def F_grad(self, u):
        return self._zero_order_grad(self.F, u)

    def G_grad(self, u):
        return self._zero_order_grad(self.G, u)

    def lp(self, u: np.ndarray) -> float:
        """``sum_j int |u_j|^p`` with the same rule as the other zero-order terms."""
        v, m = self._points(u)
        return float(np.sum(np.abs(v[:, m]) ** self.p) * self.dom.dV)

    def lp_grad(self, u: np.ndarray) -> np.ndarray:
        v, _ = self._points(u)
        return self._pull(self.p * np.sign(v) * np.abs(v) ** (self.p - 1))

    # composite functionals -----------------------------------------------------------
    def phi(self, u) -> float:
        return self.wA(u) - self.F_int(u)

    def psi(self, u) -> float:
        return self.G_int(u)

    def phi_grad(self, u) -> np.ndarray:
        return self.wA_and_grad(u)[1] - self.F_grad(u)

    def psi_grad(self, u) -> np.ndarray:
        return self.G_grad(u)

    def quotient(self, u) -> float | None:
        ps = self.psi(u)
        if not ps > 0:
            return None
        return self.phi(u) / ps ** (self.p / self.pstar)

    def report(self, u) -> EnergyReport:
        w = self.wA(u)
        fi = self.F_int(u)
        gi = self.G_int(u)
        ph = w - fi
        q = ph / gi ** (self.p / self.pstar) if gi > 0 else None
        return EnergyReport(w, fi, gi, ph, gi, q)


# functional API ---------------------------------------------------------------------
def wA_norm_p(u: np.ndarray, A: MatrixField, dom: GridDomain, p: float) -> float:
    """``sum_j int <A grad u_j, grad u_j>^{p/2}`` on the lattice."""
    u = np.asarray(u, float)
    if u.ndim == dom.n:
        u = u[None]
    return EnergyModel(dom, A, p, d=u.shape[0]).wA(u)


def report(u, A, F, G, dom, p) -> EnergyReport:
    """All energy values of ``u``; ``quotient`` is None when ``Psi <= 0``."""
    return EnergyModel(dom, A, p, F, G).report(np.asarray(u, float))


def grad_phi(u, A, F, dom, p, eps_g: float = EPS_G) -> np.ndarray:
    """Gradient of ``Phi`` with respect to nodal values."""
    return EnergyModel(dom, A, p, F=F, d=np.shape(u)[0], eps_g=eps_g).phi_grad(np.asarray(u, float))


def grad_psi(u, G, dom, p=None) -> np.ndarray:
    """Gradient of ``Psi = int G(u)`` with respect to nodal values."""
    u = np.asarray(u, float)
    return EnergyModel(dom, None, 2.0 if p is None else p, G=G, d=u.shape[0]).G_grad(u)


def p_difference(Amat: np.ndarray, xi: np.ndarray, zeta: np.ndarray, p: float) -> np.ndarray:
    """``(<A xi,xi>^{(p-2)/2} A xi - <A zeta,zeta>^{(p-2)/2} A zeta) . (xi - zeta)``.

    Vectorised over leading axes: ``Amat`` has shape ``(..., n, n)`` and the
    vectors ``(..., n)``.  A zero vector contributes a zero flux.
    """
    Amat = np.asarray(Amat, float)
    xi = np.asarray(xi, float)
    zeta = np.asarray(zeta, float)

    def flux(v):
        av = np.einsum("...ij,...j->...i", Amat, v)
        q = np.sum(av * v, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(q > 0, q ** ((p - 2) / 2), 0.0)
        return w[..., None] * av

    return np.sum((flux(xi) - flux(zeta)) * (xi - zeta), axis=-1)


def coercivity_check(F: HomogeneousFn | None, lam1: float, p: float | None = None) -> bool:
    """``M_F < lambda_1`` with ``M_F`` the maximum of ``F`` on the unit p-sphere.

    ``F = None`` means ``F = 0``.
    """
    from .homog import extrema_on_p_sphere

    if F is None:
        return 0.0 < lam1
    MF = extrema_on_p_sphere(F, F.q if p is None else p).M
    return bool(MF < lam1)
