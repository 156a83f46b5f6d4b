import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import ball
from critlap import bubbles as bb, fields as fld, homog, solve, spectra
from critlap.energy import EnergyModel
from critlap.errors import (
    ChecklistFailure,
    EmptySigmaInterval,
    Inconsistent,
    NoFeasibleInit,
    NotCoercive,
    SupportOverflow,
)
from critlap.grid import DomainSpec, build_domain

I3 = fld.constant(np.eye(3))
G6 = homog.power_sum([1.0], 6.0)


@pytest.fixture(scope="module")
def bn():
    dom = ball(3, 1 / 10)
    lam = spectra.lambda1(I3, 2.0, dom, restarts=1)
    F = homog.power_sum([0.8 * lam.value], 2.0)
    return dom, lam, F


def test_minimize_classical_bn(bn):
    dom, lam, F = bn
    m = EnergyModel(dom, I3, 2.0, F=F, G=G6)
    r = solve.minimize_Q(m, solve.default_inits(m, eigenfield=lam.field), lam.value)
    assert r.K_inv_estimate < 1 / bb.sobolev_constant(3, 2.0)
    assert r.psi == pytest.approx(1.0, abs=1e-10)
    assert r.converged
    for rs in r.restarts:
        assert r.K_inv_estimate <= rs["value"] + 1e-12
    assert np.all(np.diff(r.trace) <= 1e-12 * np.abs(r.trace[:-1]))
    w, info = solve.scale_to_solution(r, m)
    assert info["relative"] <= 0.05
    assert info["scale"] ** (6.0 - 2.0) == pytest.approx(r.K_inv_estimate, rel=1e-12)


def test_minimize_scale_erasing(bn):
    dom, lam, F = bn
    m = EnergyModel(dom, I3, 2.0, F=F, G=G6)
    u0 = solve.default_inits(m, eigenfield=lam.field)[-1][1]
    a = solve.minimize_Q(m, [("u", u0)], maxiter=30)
    b = solve.minimize_Q(m, [("cu", 7.5 * u0)], maxiter=30)
    assert np.allclose(a.trace, b.trace, rtol=1e-10)
    assert np.allclose(a.u, b.u, atol=1e-10 * np.abs(a.u).max())


def test_doubling_G_scaling(bn):
    dom, lam, F = bn
    out = []
    for c in (1.0, 2.0):
        m = EnergyModel(dom, I3, 2.0, F=F, G=homog.power_sum([c], 6.0))
        r = solve.minimize_Q(m, solve.default_inits(m, eigenfield=lam.field), lam.value)
        w, info = solve.scale_to_solution(r, m)
        assert info["relative"] <= 0.05
        out.append(r.K_inv_estimate)
    # Q(u) scales by c^{-p/p*} when G is multiplied by c
    assert out[1] == pytest.approx(out[0] * 2.0 ** (-1 / 3), rel=1e-4)


def test_scale_one_when_level_one(bn):
    dom, lam, F = bn
    m = EnergyModel(dom, I3, 2.0, F=F, G=G6)
    r = solve.minimize_Q(m, [("eig", lam.field)], maxiter=5)
    r.K_inv_estimate = 1.0
    w, info = solve.scale_to_solution(r, m, tol=np.inf)
    assert info["scale"] == 1.0 and np.array_equal(w, r.u)


def test_minimize_gates(bn):
    dom, lam, _ = bn
    m = EnergyModel(dom, I3, 2.0, F=homog.power_sum([1.1 * lam.value], 2.0), G=G6)
    with pytest.raises(NotCoercive):
        solve.minimize_Q(m, [("eig", lam.field)], lam.value)
    m = EnergyModel(dom, I3, 2.0, G=G6)
    with pytest.raises(NoFeasibleInit):
        solve.minimize_Q(m, [("zero", dom.zeros())])


def test_certificate_classical(bn):
    dom, lam, F = bn
    m = EnergyModel(dom, I3, 2.0, F=F, G=G6)
    cert = solve.existence_certificate(m, lam1_result=lam)
    assert cert.kind == "existence"
    assert cert.K_inv_upper_bound < (1 / cert.N_value) * (1 - cert.margin)
    assert m.quotient(cert.witness_field) == pytest.approx(cert.K_inv_upper_bound, rel=1e-12)
    assert cert.N_value == pytest.approx(bb.sobolev_constant(3, 2.0), rel=1e-12)


def test_certificate_zero_F_inconclusive(bn):
    dom, lam, _ = bn
    m = EnergyModel(dom, I3, 2.0, G=G6)
    cert = solve.existence_certificate(m, lam1_result=lam)
    assert cert.kind == "inconclusive"
    assert cert.K_inv_upper_bound >= (1 / cert.N_value) * 0.95
    assert cert.checklist["M_F>0"] is False


def test_certificate_coercivity_failure(bn):
    dom, lam, _ = bn
    m = EnergyModel(dom, I3, 2.0, F=homog.power_sum([1.2 * lam.value], 2.0), G=G6)
    with pytest.raises(ChecklistFailure) as exc:
        solve.existence_certificate(m, lam1_result=lam)
    assert exc.value.hypothesis == "coercivity"


def test_interior_bubble_identity_frame():
    dom = ball(3, 1 / 10)
    s = np.array([0.6, 0.8])
    x0 = np.zeros(3)
    u = solve.interior_bubble_family(I3, x0, s, 0.2, dom, 1.5, 0.9)
    r = np.linalg.norm(dom.node_coords().reshape(3, -1).T, axis=1).reshape(dom.shape)
    expect = bb.cutoff_bubble(r, 3, 1.5, 0.2, 0.9) * dom.mask
    assert np.allclose(u[0], 0.6 * expect) and np.allclose(u[1], 0.8 * expect)


def test_interior_bubble_covariance():
    # A(x0) = cI: P = c^{-1/2} I, so u_c(eps, delta) = c^{(n-p)/(2p)} u_I(eps sqrt(c), delta sqrt(c))
    dom = ball(3, 1 / 10)
    c, p = 2.5, 1.5
    uc = solve.interior_bubble_family(fld.constant(c * np.eye(3)), np.zeros(3), [1.0], 0.1, dom, p, 0.5)
    ui = solve.interior_bubble_family(I3, np.zeros(3), [1.0], 0.1 * np.sqrt(c), dom, p, 0.5 * np.sqrt(c))
    assert np.allclose(uc, c ** ((3 - p) / (2 * p)) * ui, rtol=1e-12, atol=1e-14)


def test_interior_bubble_overflow_and_positivity():
    dom = ball(3, 1 / 10)
    with pytest.raises(SupportOverflow):
        solve.interior_bubble_family(I3, np.zeros(3), [1.0], 0.1, dom, 2.0, 1.5)
    m = EnergyModel(dom, I3, 2.0, G=G6)
    for row in solve.interior_bubble_sweep(m, np.zeros(3), [1.0], 0.9, [0.4, 0.2, 0.1]):
        assert row["psi"] > 0


def test_bubble_sweep_below_threshold():
    # gamma = 2 > p and F(s) > 0: the sweep dips below N^{-1}
    n, p = 3, 1.5
    dom = ball(3, 1 / 16)
    A = fld.shifted_power(np.eye(3), 1.0, 2.0, np.zeros(3))
    Gf = homog.power_sum([1.0], 3 * p / (3 - p))
    lam = spectra.lambda1(A, p, dom, restarts=1)
    m = EnergyModel(dom, A, p, F=homog.power_sum([0.5 * lam.value], p), G=Gf)
    N = bb.constant_algebra(n, p, G=Gf, A=A, dom=dom).N
    eps = [0.95 * 2.0**-k for k in range(1, 6)]
    Q = [r["Q"] for r in solve.interior_bubble_sweep(m, np.zeros(3), [1.0], 0.95, eps)]
    k = int(np.argmin(Q))
    assert Q[k] < 1 / N
    assert Q[1] < Q[0] and k > 0
    # below a few lattice steps the bubble is unresolved and Q climbs again
    assert Q[-1] > Q[k]


def test_bubble_center_tie_break():
    dom = ball(3, 1 / 10)
    m, x0 = solve.bubble_center(I3, dom)
    assert m == pytest.approx(1.0) and np.allclose(x0, 0.0)
    A = fld.shifted_power(np.eye(3), 1.0, 2.0, [0.3, 0.0, 0.0])
    assert np.allclose(solve.bubble_center(A, dom)[1], [0.3, 0.0, 0.0])


@given(st.integers(2, 8), st.floats(1.05, 2.8), st.floats(0.1, 40.0))
def test_sigma_interval_theta_one(n, p, gamma):
    if not p < np.sqrt(n):
        with pytest.raises(EmptySigmaInterval):
            solve.sigma_interval(1.0, gamma, n, p)
        return
    ps = n * p / (n - p)
    lo = max(ps, p * (n - p) / (n - p * p))
    if lo < gamma:
        a, b = solve.sigma_interval(1.0, gamma, n, p)
        assert a == pytest.approx(lo / p) and b == pytest.approx(gamma / p)
    else:
        with pytest.raises(EmptySigmaInterval):
            solve.sigma_interval(1.0, gamma, n, p)


@pytest.mark.parametrize("p", [1.42, 1.5, 1.9])
def test_sigma_rejects_n2_large_p(p):
    with pytest.raises(EmptySigmaInterval):
        solve.sigma_interval(1.0, 100.0, 2, p)


def test_boundary_family_containment():
    theta, gamma, p = 1.2, 4.0, 1.2
    dom = build_domain(DomainSpec("cusp", 1 / 64, {"theta": theta, "n": 2}))
    lo, hi = solve.sigma_interval(theta, gamma, 2, p)
    for i in (1, 2, 3):
        u, meta = solve.boundary_singular_family(theta, gamma, 2, p, i, dom, [1.0])
        assert meta["contained"] and meta["sigma"] == pytest.approx(0.5 * (lo + hi))
        yi = np.array(meta["center"])
        pts = dom.node_coords().reshape(2, -1).T
        supp = np.abs(u[0]).ravel() > 0
        assert np.all(np.linalg.norm(pts[supp] - yi, axis=1) < meta["cutoff_radius"])
        assert np.all(dom.mask.ravel()[supp])


def test_lambda_star_lower_bound():
    n, p = 3, 2.0
    dom = ball(3, 1 / 8)
    A = fld.shifted_power(np.eye(3), 1.0, p, np.zeros(3))
    K0, _ = spectra.hardy_sobolev_K0(n, p, p)
    lam = spectra.lambda1(A, p, dom, restarts=1).value
    out = solve.lambda_star_lower_bound(A, dom, np.zeros(3), 1.0, p, p, K0, lam)
    assert out["lambda_star_lower"] == pytest.approx((n / p) ** p, rel=1e-14)
    assert out["lambda_star_lower"] < lam
    with pytest.raises(Inconsistent):
        solve.lambda_star_lower_bound(A, dom, np.zeros(3), 1.0, p, p, K0, 1.0)
    with pytest.raises(ChecklistFailure):
        solve.lambda_star_lower_bound(I3, dom, np.zeros(3), 1.0, p, p, K0)


def test_concentration_diagnostics_synthetic():
    collapse = [{"h": h, "r50": 2 * h, "mass_in_ball": 0.5} for h in (0.1, 0.05, 0.025)]
    steady = [{"h": h, "r50": 0.3, "mass_in_ball": 0.1} for h in (0.1, 0.05, 0.025)]
    assert solve.concentration_diagnostics(collapse)["exponent"] == pytest.approx(1.0)
    assert solve.concentration_diagnostics(collapse)["collapse"]
    assert not solve.concentration_diagnostics(steady)["collapse"]
