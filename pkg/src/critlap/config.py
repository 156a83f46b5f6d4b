"""Run configuration: a TOML file with one table per block.

Example::

    task = "certify-exist"
    seed = 0

    [problem]
    n = 3
    p = 2.0
    d = 1

    [domain]
    kind = "ball"
    h = 0.03125
    center = [0.0, 0.0, 0.0]
    radius = 1.0

    [coefficient]
    family = "constant"
    M = "identity"

    [F]
    family = "power_sum"
    coeffs = [1.0]
    degree = 2.0
    scale_by = "lambda1"
    factor = 0.8

    [G]
    family = "power_sum"
    coeffs = [1.0]
    degree = 6.0
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import fields as fld
from . import homog
from .errors import ConfigInvalid, DomainError
from .grid import DomainSpec

__all__ = ["TASKS", "SOLVER_DEFAULTS", "RunConfig", "load_config", "parse_config", "to_toml"]

TASKS = (
    "eigen",
    "constants",
    "minimize",
    "certify-exist",
    "certify-nonexist",
    "bubble-asymptotics",
    "pohozaev-check",
)

SOLVER_DEFAULTS = {
    "tol": 1e-7,
    "maxiter": 1500,
    "eig_tol": 1e-8,
    "eig_maxiter": 3000,
    "restarts": 1,
    "margin": 0.02,
    "residual_tol": 0.05,
    "pohozaev_tol": 0.05,
    "smoothing": 1.5,
    "eps_g": 1e-10,
    "quadrature": "midpoint",
    "concentration_threshold": 0.3,
}


@dataclass
class RunConfig:
    """Validated run configuration.

    ``raw`` keeps the parsed tables so the report can echo them.
    """

    task: str
    seed: int
    n: int
    p: float
    d: int
    domain: dict
    coefficient: dict
    F: dict | None
    G: dict | None
    solver: dict
    blocks: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def pstar(self) -> float | None:
        return self.n * self.p / (self.n - self.p) if self.p < self.n else None

    def domain_spec(self, h: float | None = None) -> DomainSpec:
        params = {k: v for k, v in self.domain.items() if k not in ("kind", "h", "refine")}
        if self.domain["kind"] == "cusp":
            params.setdefault("n", self.n)
        return DomainSpec(self.domain["kind"], float(h if h is not None else self.domain["h"]), params)

    def refine_levels(self) -> list[float]:
        return [float(x) for x in self.domain.get("refine", [])]

    def matrix_field(self) -> fld.MatrixField:
        return build_matrix_field(self.coefficient, self.n, self.p)

    def nonlinearity(self, name: str, scale: float = 1.0) -> homog.HomogeneousFn | None:
        block = self.F if name == "F" else self.G
        if block is None:
            return None
        H = build_homogeneous(block, name)
        if scale != 1.0:
            H = homog.linear_combination([H], [scale])
        return H


def _matrix(v, n: int, where: str) -> np.ndarray:
    if isinstance(v, str):
        if v == "identity":
            return np.eye(n)
        raise ConfigInvalid(where, f"unknown matrix shorthand {v!r}")
    m = np.asarray(v, float)
    if m.shape != (n, n):
        raise ConfigInvalid(where, f"expected a {n}x{n} matrix")
    return m


def build_matrix_field(block: dict, n: int, p: float) -> fld.MatrixField:
    fam = block.get("family")
    try:
        if fam == "constant":
            return fld.constant(_matrix(block.get("M", "identity"), n, "coefficient.M"))
        if fam == "shifted_power":
            return fld.shifted_power(
                _matrix(block.get("M", "identity"), n, "coefficient.M"),
                float(block.get("C", 1.0)),
                float(block["gamma"]),
                np.asarray(block.get("x0", [0.0] * n), float),
            )
        if fam == "scalar_conformal":
            return fld.scalar_conformal(
                float(block["a0"]),
                float(block["a1"]),
                float(block["beta"]),
                np.asarray(block.get("x0", [0.0] * n), float),
                p,
            )
    except KeyError as exc:
        raise ConfigInvalid("coefficient", f"missing parameter {exc.args[0]!r}") from exc
    except DomainError as exc:
        raise ConfigInvalid("coefficient", str(exc)) from exc
    raise ConfigInvalid("coefficient", f"unknown family {fam!r}")


def build_homogeneous(block: dict, where: str) -> homog.HomogeneousFn:
    fam = block.get("family")
    allow = bool(block.get("allow_nonsmooth", False))
    try:
        if fam == "power_sum":
            return homog.power_sum(block["coeffs"], float(block["degree"]), allow)
        if fam == "quad_form_power":
            return homog.quad_form_power(np.asarray(block["M"], float), float(block["degree"]), allow)
        if fam == "monomial":
            return homog.monomial(block["alpha"], allow)
        if fam == "elem_symmetric":
            return homog.elem_symmetric(int(block["d"]), int(block["ell"]), float(block["degree"]), allow)
        if fam == "linear_combination":
            terms = [build_homogeneous(t, where) for t in block["terms"]]
            return homog.linear_combination(terms, block["coeffs"])
    except KeyError as exc:
        raise ConfigInvalid(where, f"missing parameter {exc.args[0]!r}") from exc
    except DomainError as exc:
        raise ConfigInvalid(where, str(exc)) from exc
    raise ConfigInvalid(where, f"unknown family {fam!r}")


_NEEDS_PSTAR = ("constants", "minimize", "certify-exist", "certify-nonexist", "bubble-asymptotics")


def parse_config(data: dict) -> RunConfig:
    """Validate a parsed TOML document.

    Raises
    ------
    ConfigInvalid
        Naming the offending block or field.
    """
    data = copy.deepcopy(data)
    task = data.get("task")
    if task not in TASKS:
        raise ConfigInvalid("task", f"expected one of {', '.join(TASKS)}")
    if "seed" not in data:
        raise ConfigInvalid("seed", "a seed is required")
    seed = data["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigInvalid("seed", "must be an integer")
    prob = data.get("problem")
    if not isinstance(prob, dict) or "n" not in prob or "p" not in prob:
        raise ConfigInvalid("problem", "needs n and p")
    n, p = int(prob["n"]), float(prob["p"])
    if n < 2:
        raise ConfigInvalid("problem.n", "must be at least 2")
    if not p > 1:
        raise ConfigInvalid("problem.p", "must exceed 1")
    needs_pstar = task in _NEEDS_PSTAR or data.get("G") is not None
    if needs_pstar and not p < n:
        raise ConfigInvalid("problem.p", "p must lie in (1, n)")
    d = int(prob.get("d", 1))
    if d < 1:
        raise ConfigInvalid("problem.d", "must be positive")
    dom = data.get("domain", {} if task == "bubble-asymptotics" else None)
    if task != "bubble-asymptotics":
        if not isinstance(dom, dict) or "kind" not in dom:
            raise ConfigInvalid("domain", "needs kind")
        if "h" not in dom or not float(dom["h"]) > 0:
            raise ConfigInvalid("domain.h", "positive spacing required")
    coef = data.get("coefficient", {"family": "constant", "M": "identity"})
    solver = dict(SOLVER_DEFAULTS)
    extra = set(data.get("solver", {})) - set(SOLVER_DEFAULTS)
    if extra:
        raise ConfigInvalid("solver", f"unknown keys {sorted(extra)}")
    solver.update(data.get("solver", {}))
    cfg = RunConfig(
        task=task,
        seed=seed,
        n=n,
        p=p,
        d=d,
        domain=dom,
        coefficient=coef,
        F=data.get("F"),
        G=data.get("G"),
        solver=solver,
        blocks={k: v for k, v in data.items() if k in ("nonexist", "boundary", "bubble", "pohozaev", "upper_expansion", "interval")},
        output=data.get("output", {}),
        raw=data,
    )
    for name in ("F", "G"):
        block = getattr(cfg, name)
        if block is None:
            continue
        H = build_homogeneous(block, name)
        want = p if name == "F" else cfg.pstar
        if want is None or abs(H.q - want) > 1e-12:
            raise ConfigInvalid(name, f"degree {H.q:g} but {'p' if name == 'F' else 'p*'} = {want}")
        if H.d != d:
            raise ConfigInvalid(name, f"has {H.d} components but problem.d = {d}")
        if block.get("scale_by") not in (None, "lambda1", "lambda_star"):
            raise ConfigInvalid(f"{name}.scale_by", "must be 'lambda1' or 'lambda_star'")
    if task in ("constants", "minimize", "certify-exist", "certify-nonexist") and cfg.G is None:
        raise ConfigInvalid("G", f"task {task} needs a G block")
    if task == "certify-nonexist" and "nonexist" not in cfg.blocks:
        raise ConfigInvalid("nonexist", "needs x0 and gamma")
    if task == "pohozaev-check" and "field" not in cfg.blocks.get("pohozaev", {}):
        raise ConfigInvalid("pohozaev.field", "path to a field dump is required")
    try:
        cfg.matrix_field()
        if task != "bubble-asymptotics":
            if cfg.domain_spec().dimension() != n:
                raise ConfigInvalid("domain", "dimension does not match problem.n")
    except ConfigInvalid:
        raise
    except (KeyError, TypeError) as exc:
        raise ConfigInvalid("domain", f"missing or malformed parameter: {exc}") from exc
    return cfg


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a TOML run configuration."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid("file", str(exc)) from exc
    return parse_config(data)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot write {type(v).__name__} to TOML")


def to_toml(data: dict) -> str:
    """Serialise a config dictionary (scalars, lists and one level of tables).

    Tables nested in lists (``linear_combination`` terms) are written inline.
    """

    def inline(v):
        if isinstance(v, dict):
            return "{" + ", ".join(f"{k} = {inline(x)}" for k, x in v.items()) + "}"
        if isinstance(v, (list, tuple)) and any(isinstance(x, dict) for x in v):
            return "[" + ", ".join(inline(x) for x in v) + "]"
        return _toml_value(v)

    top = [f"{k} = {inline(v)}" for k, v in data.items() if not isinstance(v, dict)]
    tables = []
    for k, v in data.items():
        if isinstance(v, dict):
            tables.append(f"\n[{k}]")
            tables += [f"{kk} = {inline(vv)}" for kk, vv in v.items()]
    return "\n".join(top + tables) + "\n"
