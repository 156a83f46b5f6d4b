import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ball, box
from critlap import energy, fields as fld, homog
from critlap.energy import EnergyModel
from critlap.grid import cell_average, gradient
from critlap.spectra import lambda1


def smooth_field(dom, d, rng, modes=3):
    """Random low-frequency field, zero off the mask."""
    x = dom.node_coords()
    u = np.zeros((d,) + dom.shape)
    for j in range(d):
        for _ in range(modes):
            k = rng.uniform(0.5, 3.0, dom.n)
            ph = rng.uniform(0, 2 * np.pi, dom.n)
            u[j] += rng.standard_normal() * np.prod(np.cos(k[:, None, None] * x + ph[:, None, None]), axis=0)
    return u * dom.mask


A_ANISO = fld.shifted_power(np.diag([1.0, 2.0]), 1.0, 2.0, [0.0, 0.0])


def test_norm_trivial_cases(rng):
    dom = ball(2, 1 / 16)
    assert energy.wA_norm_p(dom.zeros(2), fld.constant(np.eye(2)), dom, 1.5) == 0.0
    u = smooth_field(dom, 2, rng)
    for p in (1.5, 2.0, 3.0):
        m = EnergyModel(dom, fld.constant(np.eye(2)), p, d=2)
        g = gradient(u, dom)
        plain = np.sum(np.sum(g**2, axis=1)[:, dom.cell_mask] ** (p / 2)) * dom.dV
        assert m.wA(u) == pytest.approx(plain, rel=1e-13)
        c = 2.5
        assert energy.wA_norm_p(u, fld.constant(c * np.eye(2)), dom, p) == pytest.approx(c ** (p / 2) * plain, rel=1e-12)


@given(st.integers(0, 10_000), st.sampled_from([1.5, 2.0, 3.0]))
def test_ellipticity_sandwich(seed, p):
    dom = ball(2, 1 / 8)
    u = smooth_field(dom, 2, np.random.default_rng(seed))
    tau, lam = fld.validate_assumptions(A_ANISO, dom)
    m = EnergyModel(dom, A_ANISO, p, d=2)
    base = m.gradient_power(u)
    assert tau ** (p / 2) * base * (1 - 1e-12) <= m.wA(u) <= lam ** (p / 2) * base * (1 + 1e-12)


@given(st.integers(0, 10_000), st.floats(0.1, 10.0), st.sampled_from([1.2, 1.5, 1.8]))
def test_homogeneity(seed, c, p):
    dom = box(3, 1 / 6)
    ps = 3 * p / (3 - p)
    F = homog.power_sum([1.0, -0.5], p)
    G = homog.power_sum([1.0, 2.0], ps)
    m = EnergyModel(dom, fld.constant(np.eye(3)), p, F, G)
    u = np.random.default_rng(seed).standard_normal((2,) + dom.shape) * dom.mask
    r1, r2 = m.report(u), m.report(c * u)
    assert r2.phi == pytest.approx(c**p * r1.phi, rel=1e-10)
    assert r2.psi == pytest.approx(c**ps * r1.psi, rel=1e-10)
    assert r2.quotient == pytest.approx(r1.quotient, rel=1e-10)
    assert r1.phi == pytest.approx(r1.wA_norm_p - r1.F_integral, rel=1e-14, abs=1e-14)
    assert r1.psi == r1.G_integral


def test_quotient_undefined_when_psi_nonpositive():
    dom = ball(2, 1 / 16)
    G = homog.power_sum([1.0, -1.0], 6.0)
    m = EnergyModel(dom, fld.constant(np.eye(2)), 1.5, None, G)
    u = dom.zeros(2)
    u[1] = dom.mask
    rep = m.report(u)
    assert rep.psi < 0 and rep.quotient is None


def test_bump_F_integral():
    dom = box(2, 1 / 32)
    lam, p = 3.0, 1.5
    F = homog.power_sum([lam], p)
    u = homog.positive_F_bump(F, dom)
    m = EnergyModel(dom, fld.constant(np.eye(2)), p, F)
    assert m.F_int(u) == pytest.approx(lam * m.lp(u), rel=1e-13)
    assert m.F_int(u) > 0


def test_grad_phi_at_zero_vanishes():
    dom = ball(2, 1 / 16)
    F = homog.power_sum([1.0, 2.0], 2.5)
    g = energy.grad_phi(dom.zeros(2), A_ANISO, F, dom, 2.5)
    assert np.all(g == 0.0)


def test_grad_phi_bilinear_identity(rng):
    dom = ball(2, 1 / 16)
    u = rng.standard_normal((1,) + dom.shape) * dom.mask
    v = rng.standard_normal((1,) + dom.shape) * dom.mask
    g = energy.grad_phi(u, fld.constant(np.eye(2)), None, dom, 2.0)
    gu, gv = gradient(u, dom), gradient(v, dom)
    want = 2 * np.sum((gu * gv)[..., dom.cell_mask]) * dom.dV
    assert np.sum(g * v) == pytest.approx(want, rel=1e-13)


def test_grad_psi_separable(rng):
    dom = ball(2, 1 / 16)
    ps = 6.0
    G = homog.power_sum([1.0, 0.0], ps)
    u = rng.standard_normal((2,) + dom.shape) * dom.mask
    nodal = EnergyModel(dom, None, 2.0, G=G, d=2, quadrature="nodes").G_grad(u)
    assert np.allclose(nodal[0], ps * np.abs(u[0]) ** (ps - 2) * u[0] * dom.dV * dom.mask)
    assert np.all(nodal[1] == 0.0)
    mid = energy.grad_psi(u, G, dom)
    assert np.all(mid[1] == 0.0)
    # midpoint rule: the nodal formula applied at cell averages, pulled back
    v = cell_average(u, dom)[0]
    from critlap.grid import cell_average_adjoint

    want = cell_average_adjoint(ps * np.abs(v) ** (ps - 2) * v * dom.cell_mask * dom.dV, dom) * dom.mask
    assert np.allclose(mid[0], want)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_directional_derivative(p, rng):
    dom = ball(2, 1 / 12)
    ps = 2 * p / (2 - p) if p < 2 else None
    F = homog.power_sum([1.0, -0.5], p)
    G = homog.power_sum([1.0, 1.0], ps) if ps else None
    m = EnergyModel(dom, A_ANISO, p, F, G, d=2)
    for _ in range(5):
        u = smooth_field(dom, 2, rng)
        v = smooth_field(dom, 2, rng)
        t = 1e-6
        fd = (m.phi(u + t * v) - m.phi(u - t * v)) / (2 * t)
        assert np.sum(m.phi_grad(u) * v) == pytest.approx(fd, rel=1e-5)
        if G is not None:
            fd = (m.psi(u + t * v) - m.psi(u - t * v)) / (2 * t)
            assert np.sum(m.psi_grad(u) * v) == pytest.approx(fd, rel=1e-5)


def test_p_difference_cases(rng):
    xi = rng.standard_normal((50, 3))
    zeta = rng.standard_normal((50, 3))
    I = np.broadcast_to(np.eye(3), (50, 3, 3))
    assert np.all(energy.p_difference(I, xi, xi, 3.0) == 0.0)
    assert np.allclose(energy.p_difference(I, xi, zeta, 2.0), np.sum((xi - zeta) ** 2, axis=1))


@given(st.integers(0, 10_000), st.sampled_from([1.3, 2.0, 3.0, 4.5]))
def test_p_difference_positive(seed, p):
    r = np.random.default_rng(seed)
    L = r.standard_normal((200, 3, 3))
    A = L @ np.swapaxes(L, 1, 2) + 0.1 * np.eye(3)
    xi, zeta = r.standard_normal((200, 3)), r.standard_normal((200, 3))
    assert np.all(energy.p_difference(A, xi, zeta, p) > 0)


def test_coercivity_check():
    assert energy.coercivity_check(None, 5.0)
    assert not energy.coercivity_check(homog.power_sum([10.0], 2.0), 5.0)
    assert energy.coercivity_check(homog.power_sum([2.5], 2.0), 5.0)


def test_coercivity_witness(rng):
    dom = ball(2, 1 / 16)
    p = 1.5
    lam = lambda1(A_ANISO, p, dom, restarts=1).value
    F = homog.power_sum([0.6 * lam], p)
    assert energy.coercivity_check(F, lam)
    m = EnergyModel(dom, A_ANISO, p, F)
    for _ in range(20):
        u = rng.standard_normal((1,) + dom.shape) * dom.mask if rng.random() < 0.5 else smooth_field(dom, 1, rng)
        w = m.wA(u)
        assert m.phi(u) >= (1 - 0.6) * w - 1e-6 * w


def test_bad_quadrature_name():
    with pytest.raises(ValueError):
        EnergyModel(ball(2, 1 / 8), fld.constant(np.eye(2)), 2.0, quadrature="simpson")
