import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import ball, box
from critlap import fields as fld, homog, pohozaev as pz, solve, spectra
from critlap.energy import EnergyModel
from critlap.errors import BFieldUnavailable, ChecklistFailure
from critlap.grid import DomainSpec, build_domain


def lshape(h=1 / 16):
    return build_domain(DomainSpec("lshape", h, {"lo": [0.0, 0.0], "hi": [1.0, 1.0], "notch": [0.5, 0.5]}))


def solve_config(dom, A, p, factor):
    """Discrete solution of -L u = lam |u|^{p-2} u + |u|^{p*-2} u with lam = factor * lambda_1."""
    n = dom.n
    ps = n * p / (n - p)
    lam = spectra.lambda1(A, p, dom, restarts=1)
    F = homog.power_sum([factor * lam.value], p)
    m = EnergyModel(dom, A, p, F=F, G=homog.power_sum([1.0], ps))
    r = solve.minimize_Q(m, solve.default_inits(m, eigenfield=lam.field), lam.value)
    w, info = solve.scale_to_solution(r, m)
    return w, F, info


CONFIGS = {
    "bn-ball-3d": (lambda: ball(3, 1 / 24), lambda: fld.constant(np.eye(3)), 2.0, 0.8),
    "disk-p15": (lambda: ball(2, 1 / 48), lambda: fld.shifted_power(np.eye(2), 1.0, 1.5, [0.0, 0.0]), 1.5, 0.6),
    "box-p12": (lambda: box(2, 1 / 32, -1.0, 1.0), lambda: fld.shifted_power(np.eye(2), 1.0, 2.0, [0.0, 0.0]), 1.2, 0.5),
}


@pytest.fixture(scope="module")
def solutions():
    out = {}
    for name, (mk_dom, mk_A, p, f) in CONFIGS.items():
        dom, A = mk_dom(), mk_A()
        w, F, info = solve_config(dom, A, p, f)
        out[name] = (dom, A, p, w, F, info)
    return out


def test_star_shaped_examples():
    assert pz.star_shaped_check(ball(2, 1 / 16), [0.0, 0.0])
    assert pz.star_shaped_check(ball(3, 1 / 8), [0.0, 0.0, 0.0])
    assert not pz.star_shaped_check(lshape(), [0.2, 0.8])
    assert pz.star_shaped_check(box(2, 1 / 16), [1 / 16, 1 / 16])


def test_zero_field():
    dom = ball(2, 1 / 16)
    A = fld.shifted_power(np.eye(2), 1.0, 2.0, [0.0, 0.0])
    r = pz.pohozaev_residual(dom.zeros(), A, homog.power_sum([1.0], 2.0), [0.0, 0.0], dom, 2.0)
    assert r.lhs == r.boundary == r.volume == r.residual == 0.0
    assert r.relative_residual == 0.0


def test_bn_solution_satisfies_identity(solutions):
    dom, A, p, w, F, info = solutions["bn-ball-3d"]
    assert info["relative"] < 1e-6
    r = pz.pohozaev_residual(w, A, F, np.zeros(3), dom, p)
    assert r.volume == 0.0
    assert r.relative_residual < 0.05
    assert r.boundary > 0


@pytest.mark.parametrize("name", list(CONFIGS))
def test_identity_discriminates(solutions, name, rng):
    dom, A, p, w, F, _ = solutions[name]
    x0 = np.zeros(dom.n)
    good = pz.pohozaev_residual(w, A, F, x0, dom, p).relative_residual
    m = EnergyModel(dom, A, p, F=F)
    # smooth random field vanishing on the boundary, matched to the solution's energy
    x = dom.node_coords()
    r2 = np.sum(x**2, axis=0)
    c = rng.standard_normal((3, dom.n))
    v = np.exp(-np.sum((x - 0.4 * c[0].reshape((-1,) + (1,) * dom.n)) ** 2, axis=0) / 0.05)
    v = v + 0.5 * np.sin(3 * np.tensordot(c[1], x, axes=1)) * np.exp(-r2)
    v = (v * dom.mask)[None]
    v *= (m.wA(w) / m.wA(v)) ** (1 / p)
    bad = pz.pohozaev_residual(v, A, F, x0, dom, p).relative_residual
    assert bad > 0.1
    assert good * 10 <= bad


@pytest.mark.parametrize("name", list(CONFIGS))
def test_boundary_term_nonnegative(solutions, name):
    dom, A, p, w, F, _ = solutions[name]
    r = pz.pohozaev_residual(w, A, F, np.zeros(dom.n), dom, p)
    assert r.star_shaped
    assert r.min_facet_term >= -1e-12 * abs(r.boundary)


def test_bfield_unavailable():
    dom = ball(2, 1 / 16)
    A = fld.MatrixField("sampled", 2, {}, lambda x: np.broadcast_to(np.eye(2), (len(x), 2, 2)).copy())
    u = dom.sample(lambda x: 1 - np.sum(x**2, axis=1))
    with pytest.raises(BFieldUnavailable):
        pz.pohozaev_residual(u, A, None, [0.0, 0.0], dom, 2.0)


def test_nonexistence_bound_algebra():
    assert pz.nonexistence_bound(1.0, 2.0, 2.0, 2.0 / 4) == pytest.approx(4.0, rel=1e-15)
    for n, p in ((3, 1.5), (4, 2.0), (5, 3.2)):
        assert pz.nonexistence_bound(0.7, p, p, p / n) == pytest.approx(0.7 * (n / p) ** p, rel=1e-14)


@given(st.floats(0.01, 10), st.floats(0.1, 3), st.floats(1.1, 3), st.floats(0.1, 2))
def test_nonexistence_bound_linear_in_C0(C0, gamma, p, K0):
    assert pz.nonexistence_bound(2 * C0, gamma, p, K0) == pytest.approx(2 * pz.nonexistence_bound(C0, gamma, p, K0), rel=1e-14)


@pytest.fixture(scope="module")
def remark_family():
    n, p = 2, 1.5
    dom = ball(2, 1 / 32)
    A = fld.shifted_power(np.eye(2), 1.0, p, [0.0, 0.0])
    G = homog.power_sum([1.0], n * p / (n - p))
    _, C0 = fld.check_pohozaev_condition(A, [0.0, 0.0], p, dom, p)
    lam_star = pz.nonexistence_bound(C0, p, p, p / n)
    lam1 = spectra.lambda1(A, p, dom, restarts=1).value
    return dom, A, G, p, C0, lam_star, lam1


def test_certificate_below_lambda_star(remark_family):
    dom, A, G, p, C0, lam_star, lam1 = remark_family
    F = homog.power_sum([0.5 * lam_star], p)
    cert = pz.nonexistence_certificate(A, F, G, dom, [0.0, 0.0], C0, p, p, lam1=lam1)
    assert cert.kind == "nonexistence"
    assert cert.values["lambda_star"] == pytest.approx(lam_star, rel=1e-12)
    assert cert.values["lambda_star_below_lambda1"]
    assert all(cert.checklist.values())


def test_certificate_above_lambda_star(remark_family):
    dom, A, G, p, C0, lam_star, lam1 = remark_family
    F = homog.power_sum([2.0 * lam_star], p)
    cert = pz.nonexistence_certificate(A, F, G, dom, [0.0, 0.0], C0, p, p, lam1=lam1)
    assert cert.kind == "inconclusive"
    assert cert.values["gap"] < 0


def test_certificate_checklist_failures(remark_family):
    _, A, G, p, C0, lam_star, _ = remark_family
    F = homog.power_sum([0.5 * lam_star], p)
    with pytest.raises(ChecklistFailure) as exc:
        pz.nonexistence_certificate(A, F, G, lshape(1 / 32), [0.2, 0.8], C0, p, p)
    assert exc.value.hypothesis == "star-shape"
    with pytest.raises(ChecklistFailure) as exc:
        pz.nonexistence_certificate(A, F, G, ball(2, 1 / 32), [0.0, 0.0], 10 * C0, p, p)
    assert exc.value.hypothesis == "B-lower-bound"
    with pytest.raises(ChecklistFailure) as exc:
        pz.nonexistence_certificate(A, F, G, ball(2, 1 / 32), [0.0, 0.0], C0, 2 * p, p)
    assert exc.value.hypothesis == "gamma"
