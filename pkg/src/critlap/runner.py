"""Task pipelines, suites and report writing behind the ``critlap`` command."""

from __future__ import annotations

import logging
import os
import time
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import bubbles, io, pohozaev, solve
from .config import RunConfig, parse_config, to_toml
from .energy import EnergyModel
from .errors import (
    ChecklistFailure,
    ConfigInvalid,
    CritlapError,
    EmptySigmaInterval,
    NotCoercive,
    ResidualTooLarge,
    UnknownSuite,
)
from .fields import check_pohozaev_condition, expansion_constant
from .grid import build_domain
from .homog import extrema_on_p_sphere
from .spectra import hardy_sobolev_K0, lambda1, lambda1F

__all__ = [
    "EXIT_OK",
    "EXIT_INCONCLUSIVE",
    "EXIT_CHECKLIST",
    "EXIT_NUMERICAL",
    "EXIT_CONFIG",
    "RunReport",
    "SuiteResult",
    "SUITES",
    "run",
    "reproduce_suite",
    "suite_configs",
]

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INCONCLUSIVE = 2
EXIT_CHECKLIST = 3
EXIT_NUMERICAL = 4


@dataclass
class RunReport:
    """Entries of one run, its exit code and the files written."""

    task: str
    entries: dict
    exit_code: int
    fields: dict = field(default_factory=dict, repr=False)
    path: Path | None = None
    text: str | None = None

    def get(self, key, default=None):
        return self.entries.get(key, default)


def _thread_limit(deterministic: bool):
    """Cap BLAS threads: one in deterministic mode, else ``CRITLAP_THREADS`` if set."""
    from threadpoolctl import threadpool_limits

    if deterministic:
        return threadpool_limits(limits=1)
    env = os.environ.get("CRITLAP_THREADS")
    if env:
        return threadpool_limits(limits=max(1, int(env)))
    return nullcontext()


# pipelines ----------------------------------------------------------------------------
def _lambda1(cfg: RunConfig, A, dom):
    s = cfg.solver
    return lambda1(A, cfg.p, dom, restarts=int(s["restarts"]), seed=cfg.seed, tol=s["eig_tol"], maxiter=int(s["eig_maxiter"]))


def _model(cfg, dom, A, F, G):
    return EnergyModel(dom, A, cfg.p, F, G, d=cfg.d, eps_g=cfg.solver["eps_g"], quadrature=cfg.solver["quadrature"])


def _scaled_F(cfg: RunConfig, lam1_value=None, lam_star=None):
    blk = cfg.F
    if blk is None:
        return None, 1.0
    by = blk.get("scale_by")
    factor = float(blk.get("factor", 1.0))
    if by == "lambda1":
        scale = factor * lam1_value
    elif by == "lambda_star":
        scale = factor * lam_star
    else:
        scale = 1.0
    return cfg.nonlinearity("F", scale), scale


def _task_eigen(cfg, A, dom, out):
    r = _lambda1(cfg, A, dom)
    out["lambda1"] = r.as_dict()
    fields = {"eigenfield": r.field}
    if cfg.F is not None:
        F, _ = _scaled_F(cfg, r.value)
        rf = lambda1F(A, cfg.p, F, dom, restarts=int(cfg.solver["restarts"]), seed=cfg.seed, tol=cfg.solver["eig_tol"])
        MF = extrema_on_p_sphere(F, cfg.p).M
        out["lambda1F"] = rf.as_dict()
        out["lambda1F"]["M_F"] = MF
        out["lambda1F"]["M_F_times_value"] = MF * rf.value
        fields["eigenfield_F"] = rf.field
    return EXIT_OK, fields


def _task_constants(cfg, A, dom, out):
    G = cfg.nonlinearity("G")
    x0 = np.asarray(cfg.blocks.get("nonexist", {}).get("x0", [0.0] * cfg.n), float)
    tab = bubbles.constant_algebra(cfg.n, cfg.p, M=A(x0[None])[0], G=G, A=A, dom=dom)
    out["constants"] = tab.as_dict()
    return EXIT_OK, {}


def _concentration_levels(cfg, A, F, G, levels):
    rows = []
    for h in levels:
        dom_h = build_domain(cfg.domain_spec(h))
        m = _model(cfg, dom_h, A, F, G)
        res = solve.minimize_Q(m, solve.default_inits(m, seed=cfg.seed), None, cfg.solver["tol"], int(cfg.solver["maxiter"]))
        row = solve.concentration_radius(res.u, m)
        row["K_inv_estimate"] = res.K_inv_estimate
        row["converged"] = res.converged
        rows.append(row)
    return rows


def _refinement(cfg, A, F, G, out):
    levels = cfg.refine_levels()
    if len(levels) < 2:
        return
    rows = _concentration_levels(cfg, A, F, G, levels)
    diag = solve.concentration_diagnostics(rows, cfg.solver["concentration_threshold"])
    for r in rows:
        diag[f"K_inv[{r['h']:.6g}]"] = r["K_inv_estimate"]
    out["refinement"] = diag


def _task_minimize(cfg, A, dom, out):
    lam = _lambda1(cfg, A, dom) if cfg.F is not None else None
    F, scale = _scaled_F(cfg, lam.value if lam else None)
    G = cfg.nonlinearity("G")
    m = _model(cfg, dom, A, F, G)
    inits = solve.default_inits(m, eigenfield=lam.field if lam else None, seed=cfg.seed)
    res = solve.minimize_Q(m, inits, lam.value if lam else None, cfg.solver["tol"], int(cfg.solver["maxiter"]))
    out["minimize"] = res.as_dict()
    out["minimize"]["F_scale"] = scale
    out["minimize"]["S_inv"] = 1.0 / bubbles.sobolev_constant(cfg.n, cfg.p)
    out["minimize"]["concentration"] = solve.concentration_radius(res.u, m)
    _refinement(cfg, A, F, G, out)
    return EXIT_OK, {"minimizer": res.u}


def _task_certify_exist(cfg, A, dom, out):
    s = cfg.solver
    lam = _lambda1(cfg, A, dom)
    F, scale = _scaled_F(cfg, lam.value)
    G = cfg.nonlinearity("G")
    m = _model(cfg, dom, A, F, G)
    out["lambda1"] = lam.value
    out["F_scale"] = scale
    fields = {}
    if "interval" in cfg.blocks:
        blk = cfg.blocks["interval"]
        x0 = np.asarray(blk.get("x0", [0.0] * cfg.n), float)
        gam = float(blk["gamma"])
        C0 = blk.get("C0", "sampled")
        C0 = expansion_constant(A, x0, gam, dom, cfg.p) if C0 == "sampled" else float(C0)
        K0, info = hardy_sobolev_K0(cfg.n, cfg.p, gam, dom=dom, x0=x0)
        iv = solve.lambda_star_lower_bound(A, dom, x0, C0, gam, cfg.p, K0, lam.value)
        out["interval"] = {"C0": C0, "gamma": gam, "K0": K0, "K0_path": info["path"], **iv}
        out["interval"]["upper"] = lam.value
    cert = solve.existence_certificate(
        m,
        margin=s["margin"],
        lam1_result=lam,
        seed=cfg.seed,
        minimize_maxiter=int(s["maxiter"]),
        minimize_tol=s["tol"],
        boundary=cfg.blocks.get("boundary"),
        upper_expansion=cfg.blocks.get("upper_expansion"),
    )
    out["certificate"] = cert.as_dict()
    fields["witness"] = cert.witness_field
    if cert.kind == "existence" and cert.minimizer is not None:
        mres = cert.minimizer
        try:
            w, info = solve.scale_to_solution(mres, m, s["residual_tol"])
            info["within_tolerance"] = True
        except ResidualTooLarge:
            w = mres.K_inv_estimate ** (1.0 / (m.pstar - m.p)) * mres.u
            info = solve.discrete_residual(w, m)
            info["within_tolerance"] = False
        out["solution"] = info
        fields["solution"] = w
        x0p = np.asarray(cfg.blocks.get("pohozaev", {}).get("x0", cert.values["x0"]), float)
        try:
            rep = pohozaev.pohozaev_residual(w, A, F, x0p, dom, cfg.p, G, s["smoothing"])
            out["pohozaev"] = rep.as_dict()
            out["pohozaev"]["x0"] = x0p.tolist()
        except CritlapError as exc:
            out["pohozaev"] = {"unavailable": str(exc)}
    _refinement(cfg, A, F, G, out)
    return (EXIT_OK if cert.kind == "existence" else EXIT_INCONCLUSIVE), fields


def _task_certify_nonexist(cfg, A, dom, out):
    blk = cfg.blocks["nonexist"]
    x0 = np.asarray(blk.get("x0", [0.0] * cfg.n), float)
    gam = float(blk["gamma"])
    lam = _lambda1(cfg, A, dom)
    C0 = blk.get("C0", "sampled")
    if C0 == "sampled":
        holds, C0 = check_pohozaev_condition(A, x0, gam, dom, cfg.p)
        if not holds:
            raise ChecklistFailure("B-lower-bound", f"sampled infimum {C0:g} is not positive")
    C0 = float(C0)
    if "K0" in blk:
        K0, path = float(blk["K0"]), "config"
    else:
        K0, info = hardy_sobolev_K0(cfg.n, cfg.p, gam, dom=dom, x0=x0)
        path = info["path"]
    lam_star = pohozaev.nonexistence_bound(C0, gam, cfg.p, K0)
    F, scale = _scaled_F(cfg, lam.value, lam_star)
    G = cfg.nonlinearity("G")
    out["lambda1"] = lam.value
    out["F_scale"] = scale
    out["K0_path"] = path
    cert = pohozaev.nonexistence_certificate(A, F, G, dom, x0, C0, gam, cfg.p, lam1=lam.value, K0=K0)
    out["certificate"] = cert.as_dict()
    code = EXIT_OK if cert.kind == "nonexistence" else EXIT_INCONCLUSIVE
    if blk.get("also_existence", False):
        m = _model(cfg, dom, A, F, G)
        try:
            ex = solve.existence_certificate(
                m, margin=cfg.solver["margin"], lam1_result=lam, seed=cfg.seed,
                minimize_maxiter=int(cfg.solver["maxiter"]), minimize_tol=cfg.solver["tol"],
            )
            out["existence"] = {"kind": ex.kind, "K_inv_upper_bound": ex.K_inv_upper_bound, "N_inv": 1.0 / ex.N_value}
        except (ChecklistFailure, NotCoercive) as exc:
            out["existence"] = {"kind": "checklist-failure", "detail": str(exc)}
        out["co_fire"] = bool(cert.kind == "nonexistence" and out["existence"]["kind"] == "existence")
    return code, {}


def _task_bubble_asymptotics(cfg, A, dom, out):
    blk = cfg.blocks.get("bubble", {})
    eps = blk.get("eps")
    rep = bubbles.bubble_asymptotics(cfg.n, cfg.p, blk.get("gammas"), eps, float(blk.get("rho", 1.0)))
    fits = {}
    for name, v in rep.fits.items():
        fits[name] = {k: x for k, x in v.items() if not isinstance(x, str) or k == "case"}
    out["eps"] = rep.eps.tolist()
    out["fits"] = fits
    return EXIT_OK, {}


def _field_path(cfg: RunConfig, base: Path | None) -> Path:
    """Resolve ``pohozaev.field``: as given, then relative to ``base``."""
    path = Path(cfg.blocks["pohozaev"]["field"])
    cands = [path] if path.is_absolute() or base is None else [path, base / path]
    for c in cands:
        if c.is_file():
            return c
    raise ConfigInvalid("pohozaev.field", f"no such file {str(path)!r}")


def _task_pohozaev_check(cfg, A, dom, out, path: Path):
    blk = cfg.blocks["pohozaev"]
    u = io.load_field(path, dom)
    # a scaled F needs the factor recorded by the run that produced the field
    F = cfg.nonlinearity("F", float(blk.get("F_scale", 1.0)))
    x0 = np.asarray(blk.get("x0", [0.0] * cfg.n), float)
    rep = pohozaev.pohozaev_residual(u, A, F, x0, dom, cfg.p, None, cfg.solver["smoothing"])
    out["pohozaev"] = rep.as_dict()
    ok = rep.relative_residual <= cfg.solver["pohozaev_tol"]
    out["pohozaev"]["within_tolerance"] = ok
    return (EXIT_OK if ok else EXIT_INCONCLUSIVE), {}


_PIPELINES = {
    "eigen": _task_eigen,
    "constants": _task_constants,
    "minimize": _task_minimize,
    "certify-exist": _task_certify_exist,
    "certify-nonexist": _task_certify_nonexist,
    "bubble-asymptotics": _task_bubble_asymptotics,
}


def run(
    cfg: RunConfig | dict,
    out_dir: str | Path | None = None,
    deterministic: bool = False,
    name: str = "report",
    base: Path | None = None,
) -> RunReport:
    """Run one task and write ``<name>.report`` plus field dumps into ``out_dir``.

    Errors from the pipelines are turned into exit codes: 3 for a failed
    hypothesis, 4 for a numerical failure.  Invalid configs raise
    :class:`~critlap.errors.ConfigInvalid`.
    """
    if isinstance(cfg, dict):
        cfg = parse_config(cfg)
    out: dict = {
        "tool": {"name": "critlap", "version": __version__},
        "task": cfg.task,
        "seed": cfg.seed,
        "deterministic": deterministic,
        "config": cfg.raw,
    }
    fpath = _field_path(cfg, base) if cfg.task == "pohozaev-check" else None
    t0 = time.perf_counter()
    fields: dict = {}
    dom = None
    with _thread_limit(deterministic):
        try:
            A = cfg.matrix_field()
            if cfg.task != "bubble-asymptotics":
                dom = build_domain(cfg.domain_spec())
                out["grid"] = {"h": dom.h, "shape": list(dom.shape), "n_interior": dom.n_interior}
            if cfg.task == "pohozaev-check":
                code, fields = _task_pohozaev_check(cfg, A, dom, out, fpath)
            else:
                code, fields = _PIPELINES[cfg.task](cfg, A, dom, out)
        except (ChecklistFailure, NotCoercive, EmptySigmaInterval) as exc:
            out["failure"] = {"kind": "checklist", "hypothesis": getattr(exc, "hypothesis", type(exc).__name__), "detail": str(exc)}
            code = EXIT_CHECKLIST
        except CritlapError as exc:
            out["failure"] = {"kind": "numerical", "error": type(exc).__name__, "detail": str(exc)}
            code = EXIT_NUMERICAL
    out["exit_code"] = code
    out["tolerances"] = dict(cfg.solver)
    if not deterministic:
        out["timing"] = {"seconds": time.perf_counter() - t0}
    rep = RunReport(cfg.task, io.flatten("", out), code, fields)
    if out_dir is not None:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        for key, u in fields.items():
            if u is not None and dom is not None:
                fp = d / f"{name}.{key}.csv"
                io.dump_field(fp, u, dom)
                rep.entries[f"dump.{key}"] = fp.name
        rep.path = d / f"{name}.report"
        rep.text = io.write_report(rep.path, rep.entries)
    return rep


# suites ---------------------------------------------------------------------------------
@dataclass
class SuiteResult:
    """Reports of a suite and its pass/fail checks ``(name, passed, detail)``."""

    name: str
    reports: dict
    checks: list

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def summary(self) -> str:
        lines = [f"suite {self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for nm, ok, detail in self.checks:
            lines.append(f"  [{'pass' if ok else 'FAIL'}] {nm}: {detail}")
        return "\n".join(lines)


def _ball(n, h, **extra):
    return {"kind": "ball", "h": h, "center": [0.0] * n, "radius": 1.0, **extra}


def _ps(coeffs, q, **extra):
    return {"family": "power_sum", "coeffs": list(coeffs), "degree": q, **extra}


def _bn_classical():
    base = {
        "seed": 0,
        "problem": {"n": 3, "p": 2.0, "d": 1},
        "coefficient": {"family": "constant", "M": "identity"},
        "G": _ps([1.0], 6.0),
    }
    exist = {
        **base,
        "task": "certify-exist",
        "domain": _ball(3, 1 / 32),
        "F": _ps([1.0], 2.0, scale_by="lambda1", factor=0.8),
    }
    zero = {
        **base,
        "task": "certify-exist",
        "domain": _ball(3, 1 / 32, refine=[1 / 16, 1 / 24, 1 / 32]),
    }
    return {"lambda-0.8": exist, "lambda-0": zero}


def _thm12_interval():
    n, p = 2, 1.5
    return {
        "interval": {
            "task": "certify-exist",
            "seed": 0,
            "problem": {"n": n, "p": p, "d": 1},
            "domain": _ball(n, 1 / 64),
            "coefficient": {"family": "shifted_power", "M": "identity", "C": 1.0, "gamma": p, "x0": [0.0, 0.0]},
            "F": _ps([1.0], p, scale_by="lambda1", factor=0.9),
            "G": _ps([1.0], n * p / (n - p)),
            "interval": {"x0": [0.0, 0.0], "gamma": p},
        }
    }


def _thm13_bubble():
    n, p = 3, 1.5
    return {
        "bubble": {
            "task": "certify-exist",
            "seed": 0,
            "problem": {"n": n, "p": p, "d": 2},
            "domain": _ball(n, 1 / 32),
            "coefficient": {"family": "shifted_power", "M": "identity", "C": 1.0, "gamma": 2.0, "x0": [0.0] * n},
            "F": _ps([3.0, -1.0], p),
            "G": _ps([1.0, 1.0], 3.0),
        }
    }


def _thm14_cusp():
    n, p, theta, gamma = 2, 1.2, 1.2, 4.0
    return {
        "cusp": {
            "task": "certify-exist",
            "seed": 0,
            "problem": {"n": n, "p": p, "d": 1},
            "domain": {"kind": "cusp", "h": 1 / 64, "theta": theta},
            "coefficient": {"family": "shifted_power", "M": "identity", "C": 1.0, "gamma": gamma, "x0": [0.0, 0.0]},
            "F": _ps([1.0], p, scale_by="lambda1", factor=0.5),
            "G": _ps([1.0], n * p / (n - p)),
            "solver": {"maxiter": 300},
            "boundary": {"theta": theta, "gamma": gamma, "indices": [1, 2, 3], "r1": 0.5},
        }
    }


def _thm15_pohozaev():
    n, p = 2, 1.5
    base = {
        "task": "certify-nonexist",
        "seed": 0,
        "problem": {"n": n, "p": p, "d": 1},
        "domain": _ball(n, 1 / 64),
        "coefficient": {"family": "shifted_power", "M": "identity", "C": 1.0, "gamma": p, "x0": [0.0, 0.0]},
        "G": _ps([1.0], n * p / (n - p)),
        "solver": {"maxiter": 400},
    }
    nx = {"x0": [0.0, 0.0], "gamma": p}
    out = {
        "half-lambda-star": {**base, "F": _ps([1.0], p, scale_by="lambda_star", factor=0.5), "nonexist": nx},
        "twice-lambda-star": {**base, "F": _ps([1.0], p, scale_by="lambda_star", factor=2.0), "nonexist": nx},
    }
    for i, f in enumerate(np.linspace(0.02, 0.95, 10)):
        out[f"sweep-{i}"] = {
            **base,
            "F": _ps([1.0], p, scale_by="lambda1", factor=float(f)),
            "nonexist": {**nx, "also_existence": True},
        }
    return out


def _constants_audit():
    out = {}
    for n, p in ((3, 2.0), (4, 2.0), (3, 1.5)):
        out[f"S-{n}-{p:g}"] = {
            "task": "constants",
            "seed": 0,
            "problem": {"n": n, "p": p, "d": 1},
            "domain": {"kind": "box", "h": 0.25, "lo": [-1.0] * n, "hi": [1.0] * n},
            "coefficient": {"family": "constant", "M": "identity"},
            "G": _ps([1.0], n * p / (n - p)),
        }
    out["aniso"] = {
        "task": "constants",
        "seed": 0,
        "problem": {"n": 3, "p": 1.5, "d": 2},
        "domain": {"kind": "box", "h": 0.125, "lo": [-1.0] * 3, "hi": [1.0] * 3},
        "coefficient": {
            "family": "shifted_power",
            "M": [[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 3.0]],
            "C": 1.0,
            "gamma": 2.0,
            "x0": [0.0, 0.0, 0.0],
        },
        "G": _ps([1.0, 2.0], 3.0),
    }
    return out


SUITES = {
    "bn-classical": _bn_classical,
    "thm12-interval": _thm12_interval,
    "thm13-bubble": _thm13_bubble,
    "thm14-cusp": _thm14_cusp,
    "thm15-pohozaev": _thm15_pohozaev,
    "constants-audit": _constants_audit,
}


def suite_configs(name: str) -> dict:
    """Config dictionaries of a suite, keyed by run label."""
    if name not in SUITES:
        raise UnknownSuite(name)
    return SUITES[name]()


def _f(rep: RunReport, key: str) -> float:
    v = rep.get(key)
    return float("nan") if v is None else float(v)


def _check_bn(r):
    ex, z = r["lambda-0.8"], r["lambda-0"]
    s_inv = 1.0 / bubbles.sobolev_constant(3, 2.0)
    return [
        ("existence at 0.8 lambda1", ex.get("certificate.kind") == "existence", f"K_inv <= {_f(ex, 'certificate.K_inv_upper_bound'):.6g} vs S^-1 = {s_inv:.6g}"),
        ("scaled solution residual", _f(ex, "solution.relative") <= 0.05, f"relative dual residual {_f(ex, 'solution.relative'):.3e}"),
        ("Pohozaev residual", _f(ex, "pohozaev.relative_residual") <= 0.05, f"relative residual {_f(ex, 'pohozaev.relative_residual'):.3e}"),
        ("no existence at lambda 0", z.get("certificate.kind") != "existence", f"kind {z.get('certificate.kind')}"),
        ("lambda 0 bound near S^-1", _f(z, "certificate.values.bound.minimize_Q") >= 0.95 * s_inv, f"K_inv estimate {_f(z, 'certificate.values.bound.minimize_Q'):.6g}"),
        ("mass collapse under refinement", bool(z.get("refinement.collapse")), f"r50 exponent {_f(z, 'refinement.exponent'):.3f}"),
    ]


def _check_thm12(r):
    rep = r["interval"]
    lo, hi = _f(rep, "interval.lambda_star_lower"), _f(rep, "interval.upper")
    return [
        ("certified lower end below lambda1", lo < hi, f"[{lo:.6g}, {hi:.6g})"),
        ("existence near lambda1", rep.get("certificate.kind") == "existence", f"kind {rep.get('certificate.kind')}"),
    ]


def _check_thm13(r):
    rep = r["bubble"]
    nb = _f(rep, "certificate.N_inv")
    bq = _f(rep, "certificate.values.bound.interior-bubble")
    return [
        ("bubble sweep below N^-1", bq < nb, f"Q = {bq:.6g} vs N^-1 = {nb:.6g}"),
        ("existence certificate", rep.get("certificate.kind") == "existence", f"kind {rep.get('certificate.kind')}"),
    ]


def _check_thm14(r):
    rep = r["cusp"]
    ran = rep.exit_code in (EXIT_OK, EXIT_INCONCLUSIVE)
    qs = [k for k in rep.entries if k.startswith("certificate.values.boundary.Q[")]
    return [
        ("runs end to end", ran, f"exit code {rep.exit_code}"),
        ("boundary family generated and contained", len(qs) > 0, f"{len(qs)} members"),
    ]


def _check_thm15(r):
    half, twice = r["half-lambda-star"], r["twice-lambda-star"]
    sweep = [v for k, v in r.items() if k.startswith("sweep-")]
    co = [k for k, v in r.items() if k.startswith("sweep-") and v.get("co_fire")]
    kinds = [(v.get("certificate.kind"), v.get("existence.kind")) for v in sweep]
    return [
        ("nonexistence at 0.5 lambda_*", half.get("certificate.kind") == "nonexistence", f"lambda_* = {_f(half, 'certificate.values.lambda_star'):.6g}"),
        ("inconclusive at 2 lambda_*", twice.get("certificate.kind") == "inconclusive", f"kind {twice.get('certificate.kind')}"),
        ("no co-firing over the sweep", not co and len(sweep) == 10, f"{kinds}"),
    ]


def _check_constants(r):
    out = []
    for (n, p) in ((3, 2.0), (4, 2.0), (3, 1.5)):
        rep = r[f"S-{n}-{p:g}"]
        S, N = _f(rep, "constants.S"), _f(rep, "constants.N")
        out.append((f"N = S for A = I at ({n},{p:g})", abs(N - S) <= 1e-12 * S, f"S = {S:.15g}"))
    rep = r["aniso"]
    S, N, mA, MG = (_f(rep, f"constants.{k}") for k in ("S", "N", "m_A", "M_G"))
    p, n = 1.5, 3
    want = mA ** (-p / (2 * n)) * MG ** (p / 3.0) * S
    out.append(("N(A;G) algebra", abs(N - want) <= 1e-12 * want, f"N = {N:.15g}"))
    return out


_CHECKS = {
    "bn-classical": _check_bn,
    "thm12-interval": _check_thm12,
    "thm13-bubble": _check_thm13,
    "thm14-cusp": _check_thm14,
    "thm15-pohozaev": _check_thm15,
    "constants-audit": _check_constants,
}


def reproduce_suite(name: str, out_dir: str | Path | None = None, deterministic: bool = False) -> SuiteResult:
    """Run every config of a suite with pinned seeds and evaluate its checks.

    With ``out_dir`` each config is also written as ``<label>.toml`` next to
    its report.
    """
    cfgs = suite_configs(name)
    reports = {}
    for label, data in cfgs.items():
        d = None
        if out_dir is not None:
            d = Path(out_dir) / name
            d.mkdir(parents=True, exist_ok=True)
            (d / f"{label}.toml").write_text(to_toml(data), encoding="utf-8")
        reports[label] = run(data, d, deterministic, name=label)
    return SuiteResult(name, reports, _CHECKS[name](reports))
