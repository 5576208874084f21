import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from motionconv.core import PreconditionError
from motionconv.fourier import measure_ft
from motionconv.fractional import (
    SingularFrequencyError,
    density_mu_1_is,
    ft_riesz,
    gamma,
    gaussian_test,
    mollify_measure_spectrum,
    pair_iz,
    polynomial_bump,
    rgamma,
    riesz_multiplier,
)
from motionconv.geometry import DiscreteMeasure, GraphFamily, build_measure, stadium
from oracles import damped_riesz_limit

ETA = gaussian_test()


def test_gamma_values():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    for z in (0.3 + 0.2j, -0.5 + 1j, 2.7, -1.5 + 0.1j):
        assert gamma(z + 1) == pytest.approx(z * gamma(z), rel=1e-10)
    assert rgamma(0) == 0 and rgamma(-2) == 0


def test_pair_at_one_is_the_integral():
    assert pair_iz(1, ETA) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-10)


def test_i_zero_is_delta():
    assert pair_iz(0, ETA, m=1) == pytest.approx(1.0, abs=1e-6)
    bump = polynomial_bump(1.5, 6)
    assert pair_iz(0, bump, m=1) == pytest.approx(1.0, abs=1e-6)


def test_half_order_against_quadrature_oracle():
    ref = integrate.quad(lambda t: t**-0.5 * math.exp(-t * t), 0, np.inf)[0] / math.sqrt(math.pi)
    assert pair_iz(0.5, ETA) == pytest.approx(ref, rel=1e-8)
    assert pair_iz(0.5, ETA) == pytest.approx(math.gamma(0.25) / (2 * math.gamma(0.5)), rel=1e-10)


@pytest.mark.parametrize("z", [0.5, -0.5, -0.5 + 1j])
@pytest.mark.parametrize("eta", [gaussian_test(), polynomial_bump(1.0, 6)], ids=["gaussian", "bump"])
def test_continuation_consistency(z, eta):
    m0 = 0 if z.real > 0 else 1
    vals = [pair_iz(z, eta, m) for m in range(m0, 4)]
    for a, b in zip(vals, vals[1:]):
        assert abs(a - b) <= 1e-6 * max(1.0, abs(a))


def test_pair_preconditions():
    with pytest.raises(PreconditionError):
        pair_iz(-0.5, ETA, m=0)
    with pytest.raises(PreconditionError):
        pair_iz(-1.0, ETA, m=1)
    with pytest.raises(PreconditionError):
        pair_iz(0.5, ETA, m=5)
    with pytest.raises(PreconditionError):
        pair_iz(-0.5, [ETA.derivs[0]], m=1, upper=12.0)


def test_riesz_at_zero_order():
    assert np.allclose(ft_riesz(0, np.array([-3.0, -0.1, 0.2, 7.0])), 1.0)


def test_branch_against_damped_oracle():
    assert abs(ft_riesz(0.5, 1.0) - damped_riesz_limit(1.0)) <= 1e-4


@given(st.floats(-2, 2), st.floats(-3, 3), st.floats(-20, 20).filter(lambda x: abs(x) > 1e-3))
def test_modulus_law(a, s, xi):
    z = complex(-a, s)
    expected = (2 * math.pi * abs(xi)) ** a * math.exp(s * math.pi * math.copysign(1, xi) / 2)
    assert abs(ft_riesz(z, xi)) == pytest.approx(expected, rel=1e-12)


@given(
    st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
    st.floats(-10, 10).filter(lambda x: abs(x) > 1e-2),
)
def test_semigroup(z, w, xi):
    lhs = ft_riesz(z, xi) * ft_riesz(w, xi)
    rhs = ft_riesz(z + w, xi)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_bound_by_lambda_half():
    s, lam = 1.0, 40.0
    xi = np.linspace(-lam, lam, 2001)
    xi = xi[xi != 0]
    c_s = math.sqrt(2 * math.pi) * math.exp(abs(s) * math.pi / 2)
    assert np.all(np.abs(ft_riesz(complex(-0.5, s), xi)) <= c_s * math.sqrt(lam) * (1 + 1e-12))


def test_singular_frequency():
    with pytest.raises(SingularFrequencyError):
        ft_riesz(-0.5, 0.0)
    with pytest.raises(SingularFrequencyError):
        ft_riesz(0.5, np.array([1.0, 0.0]))
    assert ft_riesz(0, 0.0) == 1
    m = riesz_multiplier(-0.5, np.array([0.0, 1.0]))
    assert m[0] == 0 and m[1] == ft_riesz(-0.5, 1.0)


def test_mollify_identity_and_modulus():
    mu = build_measure(stadium(), None, 256)
    xi = np.array([[1.5, -0.3], [-2.0, 4.0], [0.7, 0.7]])
    assert np.allclose(mollify_measure_spectrum(mu, 0, xi), measure_ft(mu, xi))
    for s in (0.0, 1.3):
        z = complex(-0.5, s)
        lhs = np.abs(mollify_measure_spectrum(mu, z, xi))
        rhs = np.abs(measure_ft(mu, xi)) * (2 * math.pi * np.abs(xi[:, 0])) ** 0.5 * np.exp(s * math.pi * np.sign(xi[:, 0]) / 2)
        assert np.allclose(lhs, rhs, rtol=1e-12)


def test_order_one_is_an_x1_antiderivative():
    # segment measure on {x1 = 0.3}, thickened by a Gaussian; E_1 = H(x1) delta(x2)
    n, ext, eps = 256, 2.0, 0.05
    h = 2 * ext / n
    t = (np.arange(400) + 0.5) / 400 - 0.5
    mu = DiscreteMeasure(np.stack([np.full_like(t, 0.3), 0.8 * t], -1), np.full_like(t, 0.8 / 400))
    k = np.fft.fftfreq(n, d=h)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    xi = np.stack([k1, k2], -1)
    spectrum = measure_ft(mu, xi) * np.exp(-2 * math.pi**2 * eps**2 * (k1**2 + k2**2))
    phase = np.exp(2j * math.pi * (k1 + k2) * (-ext)) / (2 * ext) ** 2 * n * n

    def to_grid(s):
        return np.fft.ifft2(s * phase).real

    dens = to_grid(spectrum)
    nz = k1 != 0
    mult = riesz_multiplier(1, k1)
    sub = np.zeros_like(spectrum)
    sub[nz] = mollify_measure_spectrum(mu, 1, xi[nz]) * np.exp(-2 * math.pi**2 * eps**2 * (k1[nz] ** 2 + k2[nz] ** 2))
    assert np.allclose(sub, spectrum * mult)
    anti = to_grid(sub)
    # oracle on the torus: zeroing xi1 = 0 leaves the primitive of (density - its x1-mean),
    # normalized to mean zero in x1
    cum = integrate.cumulative_trapezoid(dens - dens.mean(axis=0, keepdims=True), dx=h, axis=0, initial=0)
    cum -= cum.mean(axis=0, keepdims=True)
    err = np.linalg.norm(anti - cum) / np.linalg.norm(cum)
    assert err < 2e-2


def graph_family():
    return GraphFamily.with_surface_weight(
        lambda x, th: x**2 * (1 + 0.5 * np.cos(th)) + 1, lambda x, th: 2 * x * (1 + 0.5 * np.cos(th)), -1.0, 1.0
    )


@given(st.floats(-0.99, 0.99), st.floats(0, 2 * math.pi), st.floats(0.01, 3), st.floats(-3, 3))
def test_density_support_and_modulus(xp, theta, gap, s):
    fam = graph_family()
    phi = float(fam.phi(np.array(xp), theta))
    nu = float(fam.nu(np.array(xp), theta))
    below = density_mu_1_is(fam, s, np.array([phi - gap, xp]), theta)
    above = density_mu_1_is(fam, s, np.array([phi + gap, xp]), theta)
    assert below == 0
    assert abs(above) == pytest.approx(abs(nu) / abs(gamma(1 + 1j * s)), rel=1e-12, abs=1e-300)


def test_density_at_s_zero_is_heaviside():
    fam = graph_family()
    x = np.array([[0.0, 0.5], [3.0, 0.5], [1.2, -0.2]])
    vals = density_mu_1_is(fam, 0.0, x, 0.4)
    phi = fam.phi(x[:, 1], 0.4)
    nu = fam.nu(x[:, 1], 0.4)
    assert np.allclose(vals, np.where(x[:, 0] > phi, nu, 0.0))
