"""Masked uniform lattices for bounded open sets.

A :class:`GridDomain` stores a lattice ``lo + i*h`` covering the bounding box
of the domain and a boolean mask of interior nodes.  Fields are plain numpy
arrays of shape ``(d, *dom.shape)`` holding nodal values; every entry outside
the mask is zero, which is the discrete Dirichlet condition.

Discrete calculus follows one convention throughout the package:

* the gradient lives on lattice cells and is the forward difference taken
  at the lower corner of each cell, with zero extension past the mask;
* integrands are summed over active cells with weight ``h**n``, where a
  cell is active when at least one of its vertices is interior; zero-order
  integrands (``F(u)``, ``G(u)``, ``|u|^p``) are evaluated at the cell
  average of the ``2**n`` corner values (midpoint rule).

With ``p = 2`` and ``A = I`` the gradient term is the classical 5-point
(7-point in 3D) Dirichlet form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "DomainSpec",
    "GridDomain",
    "build_domain",
    "gradient",
    "gradient_adjoint",
    "cell_average",
    "cell_average_adjoint",
    "integrate",
    "surface_integrate",
    "default_spacing",
]

_EDGE_TOL = 1e-9

Predicate = Callable[[np.ndarray], np.ndarray]


def default_spacing(n: int) -> float:
    """Default lattice spacing for dimension ``n``."""
    return {2: 1.0 / 128, 3: 1.0 / 48}.get(n, 1.0 / 16)


@dataclass
class DomainSpec:
    """Description of a bounded open set and its lattice spacing.

    Parameters
    ----------
    kind
        One of ``"box"``, ``"ball"``, ``"cusp"``, ``"lshape"`` or
        ``"predicate"``.
    h
        Lattice spacing.
    params
        Kind-specific parameters.  ``box``: ``lo``, ``hi``.  ``ball``:
        ``center``, ``radius``.  ``cusp``: ``theta``, ``lo``, ``hi`` (clip box,
        default ``[-1,1] x [0,1]``), optional ``n``.  ``lshape``: ``lo``,
        ``hi`` and ``notch`` (the removed upper corner quadrant starts at
        ``notch``).  ``predicate``: ``fn`` (vectorised over points of shape
        ``(m, n)``), ``lo``, ``hi``.
    """

    kind: str
    h: float
    params: dict = field(default_factory=dict)

    def dimension(self) -> int:
        p = self.params
        if self.kind == "ball":
            return len(np.atleast_1d(p["center"]))
        if self.kind == "cusp":
            return int(p.get("n", len(p.get("lo", (-1.0, 0.0)))))
        return len(np.atleast_1d(p["lo"]))


class GridDomain:
    """Lattice, interior mask and boundary facets of a discretised domain.

    Attributes
    ----------
    n : int
        Space dimension.
    lo, hi : ndarray
        Lattice corners; node ``i`` sits at ``lo + i*h``.
    h : float
        Spacing.
    shape : tuple of int
        Number of nodes per axis.
    mask : ndarray of bool
        Interior nodes.
    cell_mask : ndarray of bool
        Active cells, indexed by their lower corner node.
    facet_nodes : ndarray of int, shape (m, n)
        Interior node adjacent to each boundary facet.
    facet_axis, facet_sign : ndarray of int
        Outward normal of each facet is ``facet_sign * e_{facet_axis}``.
    """

    def __init__(
        self,
        lo: Sequence[float],
        h: float,
        shape: Sequence[int],
        mask: np.ndarray,
        spec: DomainSpec | None = None,
    ) -> None:
        self.lo = np.asarray(lo, dtype=float)
        self.h = float(h)
        self.shape = tuple(int(s) for s in shape)
        self.n = len(self.shape)
        self.hi = self.lo + (np.asarray(self.shape) - 1) * self.h
        self.mask = np.asarray(mask, dtype=bool)
        self.spec = spec
        if self.mask.shape != self.shape:
            raise DomainError("mask shape does not match lattice shape")
        if not self.mask.any():
            raise DomainError("empty interior after masking")
        self.cell_mask = self._active_cells()
        self._facets()
        self.cache: dict = {}

    # geometry -----------------------------------------------------------
    @property
    def dV(self) -> float:
        return self.h**self.n

    @property
    def dS(self) -> float:
        return self.h ** (self.n - 1)

    @property
    def n_interior(self) -> int:
        return int(self.mask.sum())

    @property
    def weights(self) -> np.ndarray:
        """Nodal quadrature weights: ``h**n`` on interior nodes, 0 elsewhere."""
        return self.mask * self.dV

    @property
    def volume(self) -> float:
        """Measure of the domain under nodal quadrature."""
        return self.n_interior * self.dV

    def axes(self) -> list[np.ndarray]:
        return [self.lo[a] + self.h * np.arange(self.shape[a]) for a in range(self.n)]

    def node_coords(self) -> np.ndarray:
        """Coordinates of every lattice node, shape ``(n, *shape)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"))

    def cell_centers(self) -> np.ndarray:
        """Centres of every lattice cell, shape ``(n, *shape)``."""
        return self.node_coords() + 0.5 * self.h

    def interior_points(self) -> np.ndarray:
        """Interior node coordinates in lexicographic order, shape ``(m, n)``."""
        return self.node_coords()[:, self.mask].T

    def closure_points(self, with_cells: bool = False) -> np.ndarray:
        """Sample points of the closure: interior nodes and their neighbours.

        Exterior nodes in the ``3**n`` neighbourhood of the mask stand in for
        the boundary.  With ``with_cells`` the centres of active cells are
        appended.
        """
        near = _dilate(self.mask)
        pts = self.node_coords()[:, near].T
        if with_cells:
            pts = np.vstack([pts, self.cell_centers()[:, self.cell_mask].T])
        return pts

    def isolated_nodes(self) -> int:
        """Number of interior nodes without an interior axis neighbour."""
        nb = np.zeros(self.shape, dtype=bool)
        for a in range(self.n):
            nb |= _shift(self.mask, a, 1) | _shift(self.mask, a, -1)
        return int((self.mask & ~nb).sum())

    # field helpers -------------------------------------------------------
    def zeros(self, d: int = 1) -> np.ndarray:
        return np.zeros((d,) + self.shape)

    def restrict(self, u: np.ndarray) -> np.ndarray:
        """Interior values of a field, shape ``(d, m)`` flattened to ``d*m``."""
        return u[:, self.mask].ravel()

    def embed(self, x: np.ndarray, d: int) -> np.ndarray:
        """Inverse of :meth:`restrict`."""
        u = np.zeros((d,) + self.shape)
        u[:, self.mask] = np.asarray(x).reshape(d, -1)
        return u

    def sample(self, fn: Callable[[np.ndarray], np.ndarray], d: int = 1) -> np.ndarray:
        """Evaluate ``fn`` on interior nodes; ``fn`` maps ``(m, n)`` to ``(m,)`` or ``(m, d)``."""
        vals = np.asarray(fn(self.interior_points()), dtype=float)
        vals = vals.reshape(vals.shape[0], -1).T
        if vals.shape[0] != d:
            raise DomainError(f"sampled function has {vals.shape[0]} components, expected {d}")
        return self.embed(vals, d)

    def nearest_node(self, x: Sequence[float]) -> tuple[int, ...]:
        idx = np.rint((np.asarray(x, dtype=float) - self.lo) / self.h).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.shape) - 1)
        return tuple(int(i) for i in idx)

    def contains(self, x: Sequence[float]) -> bool:
        """Whether ``x`` lies in the closure of the union of active cells."""
        rel = (np.asarray(x, dtype=float) - self.lo) / self.h
        if np.any(rel < 0) or np.any(rel > np.asarray(self.shape) - 1):
            return False
        lower = np.floor(rel).astype(int)
        for corner in itertools.product((0, 1), repeat=self.n):
            idx = np.minimum(lower + np.array(corner), np.asarray(self.shape) - 1)
            if self.mask[tuple(idx)]:
                return True
        return False

    # boundary ------------------------------------------------------------
    def _active_cells(self) -> np.ndarray:
        act = np.zeros(self.shape, dtype=bool)
        for corner in itertools.product((0, 1), repeat=self.n):
            m = self.mask
            for a, c in enumerate(corner):
                if c:
                    m = _shift(m, a, 1)
            act |= m
        return act

    def _facets(self) -> None:
        nodes, axis, sign = [], [], []
        for a in range(self.n):
            for s in (1, -1):
                nb = _shift(self.mask, a, s, fill=False)
                hit = self.mask & ~nb
                idx = np.argwhere(hit)
                nodes.append(idx)
                axis.append(np.full(len(idx), a))
                sign.append(np.full(len(idx), s))
        nodes_arr = np.vstack(nodes)
        axis_arr = np.concatenate(axis)
        sign_arr = np.concatenate(sign)
        order = np.lexsort((sign_arr, axis_arr) + tuple(nodes_arr.T[::-1]))
        self.facet_nodes = nodes_arr[order]
        self.facet_axis = axis_arr[order]
        self.facet_sign = sign_arr[order]

    @property
    def n_facets(self) -> int:
        return len(self.facet_axis)

    def facet_normals(self) -> np.ndarray:
        """Outward unit normals, shape ``(m, n)``."""
        nu = np.zeros((self.n_facets, self.n))
        nu[np.arange(self.n_facets), self.facet_axis] = self.facet_sign
        return nu

    def facet_centroids(self) -> np.ndarray:
        """Facet midpoints, half a step from the adjacent interior node."""
        x = self.lo + self.h * self.facet_nodes
        return x + 0.5 * self.h * self.facet_normals()

    def __repr__(self) -> str:
        return (
            f"GridDomain(n={self.n}, h={self.h:g}, shape={self.shape}, "
            f"interior={self.n_interior}, facets={self.n_facets})"
        )


def _shift(m: np.ndarray, axis: int, s: int, fill=False) -> np.ndarray:
    """``out[i] = m[i + s*e_axis]`` with ``fill`` past the array edge."""
    out = np.full_like(m, fill)
    src = [slice(None)] * m.ndim
    dst = [slice(None)] * m.ndim
    if s > 0:
        src[axis] = slice(s, None)
        dst[axis] = slice(None, -s)
    else:
        src[axis] = slice(None, s)
        dst[axis] = slice(-s, None)
    out[tuple(dst)] = m[tuple(src)]
    return out


def _dilate(m: np.ndarray) -> np.ndarray:
    out = m.copy()
    for a in range(m.ndim):
        out = out | _shift(out, a, 1) | _shift(out, a, -1)
    return out


# construction ---------------------------------------------------------------
def _lattice(lo: np.ndarray, hi: np.ndarray, h: float) -> tuple[np.ndarray, tuple[int, ...]]:
    counts = np.ceil((hi - lo) / h - 1e-9).astype(int) + 1
    return lo, tuple(int(c) for c in counts)


def _cusp_predicate(theta: float) -> Predicate:
    def pred(x: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(x[:, :-1], axis=1)
        return x[:, -1] > r ** (1.0 / theta)

    return pred


def build_domain(spec: DomainSpec) -> GridDomain:
    """Discretise the domain described by ``spec``.

    A node is interior when the defining predicate holds there and the node
    lies strictly inside the bounding box, so the outermost lattice layer is
    always exterior.

    Raises
    ------
    DomainError
        If ``h <= 0``, ``n < 2``, ``theta < 1`` for a cusp, or the interior is
        empty.
    """
    if not spec.h > 0:
        raise DomainError("spacing h must be positive")
    n = spec.dimension()
    if n < 2:
        raise DomainError("dimension must be at least 2")
    p = spec.params
    kind = spec.kind
    if kind == "box":
        lo, hi = np.asarray(p["lo"], float), np.asarray(p["hi"], float)
        pred: Predicate = lambda x: np.ones(len(x), dtype=bool)  # noqa: E731
    elif kind == "ball":
        c = np.asarray(p["center"], float)
        r = float(p["radius"])
        lo, hi = c - r, c + r
        pred = lambda x: np.sum((x - c) ** 2, axis=1) < r * r  # noqa: E731
    elif kind == "cusp":
        theta = float(p["theta"])
        if theta < 1:
            raise DomainError("cusp exponent theta must be >= 1")
        lo = np.asarray(p.get("lo", [-1.0] * (n - 1) + [0.0]), float)
        hi = np.asarray(p.get("hi", [1.0] * (n - 1) + [1.0]), float)
        pred = _cusp_predicate(theta)
    elif kind == "lshape":
        lo, hi = np.asarray(p["lo"], float), np.asarray(p["hi"], float)
        notch = np.asarray(p.get("notch", (lo + hi) / 2), float)
        pred = lambda x: ~np.all(x >= notch, axis=1)  # noqa: E731
    elif kind == "predicate":
        lo, hi = np.asarray(p["lo"], float), np.asarray(p["hi"], float)
        pred = p["fn"]
    else:
        raise DomainError(f"unknown domain kind {kind!r}")
    if lo.shape != (n,) or hi.shape != (n,) or np.any(hi <= lo):
        raise DomainError("bounding box must satisfy lo < hi in every axis")
    lo, shape = _lattice(lo, hi, spec.h)
    axes = [lo[a] + spec.h * np.arange(shape[a]) for a in range(n)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij")).reshape(n, -1).T
    tol = _EDGE_TOL * spec.h
    inside = np.all(pts > lo + tol, axis=1) & np.all(pts < hi - tol, axis=1)
    inside &= np.asarray(pred(pts), dtype=bool)
    return GridDomain(lo, spec.h, shape, inside.reshape(shape), spec=spec)


# calculus -------------------------------------------------------------------
def gradient(u: np.ndarray, dom: GridDomain) -> np.ndarray:
    """Forward-difference gradient on cells.

    Parameters
    ----------
    u
        Nodal field of shape ``dom.shape`` or ``(d, *dom.shape)``, zero off the
        mask.

    Returns
    -------
    ndarray
        Shape ``(n, *dom.shape)`` or ``(d, n, *dom.shape)``; entry at cell
        index ``i`` is ``(u[i + e_a] - u[i]) / h``, with ``u`` taken as zero
        past the end of the lattice.
    """
    u = np.asarray(u, dtype=float)
    lead = u.ndim - dom.n
    out = np.empty(u.shape[:lead] + (dom.n,) + u.shape[lead:])
    for a in range(dom.n):
        ax = lead + a
        g = -u.copy()
        src = [slice(None)] * u.ndim
        dst = [slice(None)] * u.ndim
        src[ax] = slice(1, None)
        dst[ax] = slice(None, -1)
        g[tuple(dst)] += u[tuple(src)]
        out[(slice(None),) * lead + (a,)] = g / dom.h
    return out


def gradient_adjoint(g: np.ndarray, dom: GridDomain) -> np.ndarray:
    """Adjoint of :func:`gradient` in the Euclidean pairing of lattice arrays.

    ``g`` has shape ``(..., n, *dom.shape)``; the result has shape
    ``(..., *dom.shape)``.  The result is not masked.
    """
    g = np.asarray(g, dtype=float)
    lead = g.ndim - dom.n - 1
    out = np.zeros(g.shape[:lead] + g.shape[lead + 1 :])
    for a in range(dom.n):
        ga = g[(slice(None),) * lead + (a,)]
        ax = lead + a
        out -= ga
        src = [slice(None)] * ga.ndim
        dst = [slice(None)] * ga.ndim
        src[ax] = slice(None, -1)
        dst[ax] = slice(1, None)
        out[tuple(dst)] += ga[tuple(src)]
    return out / dom.h


def cell_average(u: np.ndarray, dom: GridDomain) -> np.ndarray:
    """Mean of the ``2^n`` corner values of each cell (cell index = lower corner)."""
    out = np.asarray(u, dtype=float)
    lead = out.ndim - dom.n
    for a in range(dom.n):
        ax = lead + a
        nxt = np.zeros_like(out)
        src = [slice(None)] * out.ndim
        dst = [slice(None)] * out.ndim
        src[ax] = slice(1, None)
        dst[ax] = slice(None, -1)
        nxt[tuple(dst)] = out[tuple(src)]
        out = 0.5 * (out + nxt)
    return out


def cell_average_adjoint(v: np.ndarray, dom: GridDomain) -> np.ndarray:
    """Adjoint of :func:`cell_average`; the result is not masked."""
    out = np.asarray(v, dtype=float)
    lead = out.ndim - dom.n
    for a in range(dom.n):
        ax = lead + a
        prv = np.zeros_like(out)
        src = [slice(None)] * out.ndim
        dst = [slice(None)] * out.ndim
        src[ax] = slice(None, -1)
        dst[ax] = slice(1, None)
        prv[tuple(dst)] = out[tuple(src)]
        out = 0.5 * (out + prv)
    return out


def integrate(vals: np.ndarray, dom: GridDomain, where: str = "nodes") -> float:
    """Quadrature of lattice values.

    ``where="nodes"`` sums over interior nodes and ``where="cells"`` over
    active cells; both use weight ``h**n``.  Leading axes are summed too.
    """
    vals = np.asarray(vals, dtype=float)
    if where == "nodes":
        m = dom.mask
    elif where == "cells":
        m = dom.cell_mask
    else:
        raise ValueError("where must be 'nodes' or 'cells'")
    vals = np.broadcast_to(vals, vals.shape[: vals.ndim - dom.n] + dom.shape)
    return float(np.sum(vals[..., m]) * dom.dV)


def surface_integrate(facetvals: np.ndarray, dom: GridDomain) -> float:
    """Sum of per-facet values times the facet area ``h**(n-1)``."""
    v = np.asarray(facetvals, dtype=float)
    if v.ndim == 0:
        v = np.full(dom.n_facets, float(v))
    if v.shape[-1] != dom.n_facets:
        raise ValueError("one value per facet expected")
    return float(np.sum(v) * dom.dS)
