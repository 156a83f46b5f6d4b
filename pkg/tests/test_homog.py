import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import box
from critlap import homog
from critlap.errors import DomainError, NoGoodDirection, NoPositiveDirection
from critlap.grid import integrate
from families import catalogue, generic_points

FAMILIES = catalogue()
IDS = [n for n, _ in FAMILIES]


def test_power_sum_example():
    H = homog.power_sum([1.0, 1.0], 2.0)
    assert H(np.array([3.0, 4.0])) == pytest.approx(25.0)
    assert np.allclose(H.grad(np.array([3.0, 4.0])), [6.0, 8.0])


def test_monomial_example():
    H = homog.monomial([1.0, 1.0])
    s = np.array([2.0, -3.0])
    assert abs(H(s)) == pytest.approx(6.0)
    assert np.dot(s, H.grad(s)) == pytest.approx(2 * H(s))


def test_quad_form_example():
    H = homog.quad_form_power([[2.0, 1.0], [1.0, 2.0]], 3.0)
    assert H(np.array([1.0, 0.0])) == pytest.approx(2**1.5)
    assert H(np.array([2.0, 0.0])) == pytest.approx(2**3 * 2**1.5)


@pytest.mark.parametrize("name,H", FAMILIES, ids=IDS)
def test_zero_and_identities(name, H, rng):
    assert H(np.zeros(H.d)) == 0.0
    s = generic_points(H.d, 200, rng)
    rho = rng.uniform(0.1, 5.0, 200)
    v = H(s)
    assert np.all(np.abs(H(rho * s) - rho**H.q * v) <= 1e-9 * (1 + np.abs(H(rho * s))))
    g = H.grad(s)
    assert np.all(np.abs(np.sum(s * g, axis=0) - H.q * v) <= 1e-6 * (1 + np.abs(v)))
    assert np.allclose(H.grad(rho * s), rho ** (H.q - 1) * g, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("name,H", FAMILIES, ids=IDS)
def test_gradient_finite_differences(name, H, rng):
    s = generic_points(H.d, 100, rng)
    g = H.grad(s)
    e = 1e-6
    fd = np.stack([(H(s + e * np.eye(H.d)[:, [j]]) - H(s - e * np.eye(H.d)[:, [j]])) / (2 * e) for j in range(H.d)])
    err = np.linalg.norm(fd - g, axis=0) / np.maximum(np.linalg.norm(g, axis=0), 1e-3)
    assert err.max() < 1e-5


@pytest.mark.parametrize("name,H", FAMILIES, ids=IDS)
def test_sphere_bound(name, H, rng):
    p = 1.7
    ext = homog.extrema_on_p_sphere(H, p)
    assert ext.mu <= ext.M
    for s in (ext.argmax, ext.argmin):
        assert homog.p_norm(s, p) == pytest.approx(1.0, abs=1e-12)
    assert H(ext.argmax) == pytest.approx(ext.M, rel=1e-12, abs=1e-14)
    assert H(ext.argmin) == pytest.approx(ext.mu, rel=1e-12, abs=1e-14)
    s = rng.standard_normal((H.d, 1000))
    assert np.all(H(s) <= ext.M * homog.p_norm(s, p) ** H.q + 1e-9)
    assert np.all(H(s) >= ext.mu * homog.p_norm(s, p) ** H.q - 1e-9)


def test_nonsmooth_gate():
    with pytest.raises(DomainError):
        homog.monomial([0.5, 2.0])
    with pytest.raises(DomainError):
        homog.quad_form_power(np.diag([1.0, -1.0]), 1.5)
    with pytest.raises(DomainError):
        homog.elem_symmetric(3, 2, 3.0)
    with pytest.raises(DomainError):
        homog.linear_combination([homog.power_sum([1.0], 2.0), homog.power_sum([1.0], 3.0)], [1.0, 1.0])


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_extrema_closed_forms(p):
    e = homog.extrema_on_p_sphere(homog.power_sum([1.0, 1.0, 1.0], p), p)
    assert e.M == pytest.approx(1.0) and e.mu == pytest.approx(1.0)
    e = homog.extrema_on_p_sphere(homog.power_sum([2.0, 1.0], p), p)
    assert e.M == pytest.approx(2.0) and e.mu == pytest.approx(1.0)
    # flat extremum: location only to the ascent's resolution
    assert np.allclose(np.abs(e.argmax), [1.0, 0.0], atol=1e-4)
    assert np.allclose(np.abs(e.argmin), [0.0, 1.0], atol=1e-4)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_extrema_monomial_lagrange(p):
    # maximise prod a_j^{alpha_j/p} on sum a_j = 1: a_j = alpha_j / q
    alpha = np.array([p / 2, p / 2])
    H = homog.monomial(alpha, allow_nonsmooth=True)
    want = np.prod((alpha / alpha.sum()) ** (alpha / p))
    e = homog.extrema_on_p_sphere(H, p)
    assert e.M == pytest.approx(want, rel=1e-8)
    t = np.linspace(0, 2 * np.pi, 200_001)
    s = np.stack([np.cos(t), np.sin(t)])
    s = s / homog.p_norm(s, p)
    assert e.M == pytest.approx(H(s).max(), rel=1e-6)


def test_good_direction_scalar():
    s = homog.find_good_direction(homog.power_sum([0.5], 2.0), homog.power_sum([1.0], 6.0), 2.0)
    assert np.allclose(np.abs(s), [1.0])


def test_good_direction_picks_positive_corner():
    p = 1.5
    F = homog.power_sum([1.0, -1.0], p)
    G = homog.power_sum([1.0, 1.0], 3.0)
    s = homog.find_good_direction(F, G, p)
    assert F(s) > 0
    assert np.allclose(np.abs(s), [1.0, 0.0], atol=1e-9)


def test_good_direction_none():
    with pytest.raises(NoGoodDirection):
        homog.find_good_direction(homog.power_sum([-1.0, -1.0], 2.0), homog.power_sum([1.0, 1.0], 6.0), 2.0)


def test_bump_positive():
    dom = box(2, 1 / 32)
    u = homog.positive_F_bump(homog.power_sum([1.0], 2.0), dom, center=[0.5, 0.5], radius=0.25)
    assert integrate(u[0] ** 2, dom) > 0


def test_bump_signed_family():
    p = 1.5
    dom = box(2, 1 / 32)
    F = homog.power_sum([1.0, -1.0], p)
    u = homog.positive_F_bump(F, dom)
    assert np.allclose(u[1], 0.0)
    val = integrate(F(u), dom)
    assert val == pytest.approx(integrate(np.abs(u[0]) ** p, dom))
    assert val > 0


def test_bump_rejects_negative():
    with pytest.raises(NoPositiveDirection):
        homog.positive_F_bump(homog.power_sum([-1.0, -1.0], 2.0), box(2, 1 / 16))


@given(st.lists(st.floats(0.1, 3.0), min_size=2, max_size=3), st.floats(1.2, 4.0), st.integers(0, 1000))
def test_power_sum_properties(c, q, seed):
    H = homog.power_sum(c, q)
    r = np.random.default_rng(seed)
    s = r.standard_normal((H.d, 20))
    rho = r.uniform(0.1, 4.0)
    assert np.allclose(H(rho * s), rho**q * H(s), rtol=1e-9)
    assert np.allclose(np.sum(s * H.grad(s), axis=0), q * H(s), rtol=1e-9, atol=1e-12)
