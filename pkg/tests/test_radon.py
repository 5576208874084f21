import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motionconv.core import ExtentError, MotionGridFunction, PlaneGridFunction, PreconditionError, UnderResolvedError, lp_norm
from motionconv.geometry import GraphFamily, RotatedFamily, circle, parabola, rotate_measure, stadium
from motionconv.inputs import ball, bandlimited, gaussian
from motionconv.radon import (
    apply,
    apply_direct,
    apply_spectral,
    direct_slab,
    family_plan,
    improving_ratio,
    motion_convolve,
    rotated_plan,
    sharpness_scan,
    zero_plan,
)

N, EXT, M = 128, 4.0, 64


@pytest.fixture(scope="module")
def circle_plan():
    return rotated_plan(circle(), None, 1024, M)


@pytest.fixture(scope="module")
def small_plan():
    return rotated_plan(stadium(), None, 512, 8)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_zero_input(circle_plan):
    f = PlaneGridFunction(np.zeros((N, N)), EXT)
    for method in ("direct", "spectral"):
        assert not np.any(apply(f, circle_plan, method).samples)


def test_constant_input_gives_mass(small_plan):
    f = PlaneGridFunction(np.ones((64, 64)), 4.0)
    mass = small_plan.measures[0].mass
    for method in ("direct", "spectral"):
        tf = apply(f, small_plan, method, periodic=True).samples
        assert np.allclose(tf, mass, rtol=1e-10)


def test_spectral_table_at_zero_is_mass(small_plan):
    for a in range(small_plan.n_angles):
        tab = small_plan.spectral_table(a, 64, 4.0)
        assert tab[0, 0] == pytest.approx(small_plan.measures[a].mass, abs=1e-10)


def test_delta_input_lands_on_the_rotated_curve():
    # (delta * gamma_theta)(x) = int delta(x - p) dgamma_theta(p): mass sits at x = +p
    n, ext = 256, 3.0
    plan = rotated_plan(parabola(), None, 2048, 4)
    f = np.zeros((n, n))
    h = 2 * ext / n
    f[n // 2, n // 2] = 1 / h**2  # unit mass at the origin
    tf = apply_direct(PlaneGridFunction(f, ext), plan, periodic=True)
    c = tf.coords
    x1, x2 = np.meshgrid(c, c, indexing="ij")
    for a in range(plan.n_angles):
        slab = tf.samples[:, :, a].real
        assert slab.sum() * h * h == pytest.approx(plan.measures[a].mass, rel=1e-10)
        centre = np.array([(slab * x1).sum(), (slab * x2).sum()]) / slab.sum()
        mu = plan.measures[a]
        expected = mu.weights @ mu.points / mu.mass
        assert np.allclose(centre, expected, atol=h)
        assert np.linalg.norm(centre + expected) > 1.0  # not the reflected curve


def test_single_mode_is_an_eigenfunction(small_plan):
    n, ext = 64, 4.0
    k = np.array([3, -2])
    xi = k / (2 * ext)
    f = PlaneGridFunction.from_callable(lambda x1, x2: np.exp(2j * math.pi * (xi[0] * x1 + xi[1] * x2)), n, ext)
    tf = apply_spectral(f, small_plan, periodic=True)
    from motionconv.fourier import measure_ft

    for a in range(small_plan.n_angles):
        lam = measure_ft(small_plan.measures[a], xi)
        assert np.allclose(tf.samples[:, :, a], lam * f.samples, atol=1e-10)


def test_path_equivalence_circle(circle_plan):
    f = bandlimited(N, EXT, seed=3, kmax=N / (128 * EXT))
    d = apply_direct(f, circle_plan, periodic=True).samples
    s = apply_spectral(f, circle_plan, periodic=True).samples
    assert rel(s, d) <= 1e-3


@settings(max_examples=10)
@given(st.integers(0, 1000), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, a, b):
    plan = rotated_plan(stadium(), None, 256, 4)
    f = bandlimited(32, 4.0, seed, 1.0)
    g = bandlimited(32, 4.0, seed + 1, 1.0)
    comb = PlaneGridFunction(a * f.samples + b * g.samples, 4.0)
    for method in ("spectral", "direct"):
        lhs = apply(comb, plan, method, periodic=True).samples
        rhs = a * apply(f, plan, method, periodic=True).samples + b * apply(g, plan, method, periodic=True).samples
        scale = max(np.abs(rhs).max(), 1e-300)
        assert np.abs(lhs - rhs).max() <= 1e-10 * scale + 1e-300


@pytest.mark.parametrize("curve", [circle(), stadium()], ids=["circle", "stadium"])
def test_rotation_equivariance(curve):
    # T(f o R_a)(R_{-a} x, theta - a) = Tf(x, theta), a = pi/2
    n, ext, m_ang = 128, 4.0, 16
    plan = rotated_plan(curve, None, 1024, m_ang)
    f = gaussian(n, ext, 0.2, centre=(0.3, -0.2))
    idx = (-np.arange(n)) % n
    frot = np.stack([f.samples[idx, i] for i in range(n)])  # f(R x) with R(x1, x2) = (-x2, x1)
    for method in ("spectral", "direct"):
        tf = apply(f, plan, method, periodic=True).samples
        tr = apply(PlaneGridFunction(frot, ext), plan, method, periodic=True).samples
        pred = np.stack([np.roll(tf[idx, i, :], -m_ang // 4, axis=-1) for i in range(n)])
        assert rel(tr, pred) <= 1e-2


def test_extent_and_resolution_preconditions(circle_plan):
    with pytest.raises(ExtentError):
        apply_spectral(gaussian(128, 1.5, 0.2), circle_plan)
    coarse = rotated_plan(circle(), None, 64, 4)
    with pytest.raises(UnderResolvedError):
        apply_direct(gaussian(256, 4.0, 0.2), coarse)


def test_group_convolution_reproduces_the_rotated_operator():
    n, ext, m_ang = 128, 5.0, 8
    fam = GraphFamily.with_surface_weight(
        lambda x, th: x**2 * (1 + 0.5 * np.cos(th)) + 1, lambda x, th: 2 * x * (1 + 0.5 * np.cos(th)), -1.0, 1.0
    )
    plan = family_plan(fam, 512, m_ang)
    f = gaussian(n, ext, 0.2)
    F = MotionGridFunction.from_plane(f, m_ang)
    tf = motion_convolve(F, plan).samples
    # (F * mu)(., theta_i) = (1/M) sum_b f * R_{theta_b} mu_{i-b}, summed here with the direct path
    for i in (0, 3):
        ref = sum(
            direct_slab(f.samples, rotate_measure(plan.measures[(i - b) % m_ang], plan.angles[b]), f.h) for b in range(m_ang)
        ) / m_ang
        assert rel(tf[:, :, i], ref) < 1e-2
    # for a rotated family R_{theta_b} gamma_{i-b} = gamma_i, so F * mu = f * gamma_k slab by slab
    rplan = rotated_plan(circle(), None, 512, m_ang)
    direct = apply_spectral(f, rplan).samples
    via_group = motion_convolve(F, family_plan(RotatedFamily(circle(), None), 512, m_ang)).samples
    assert rel(via_group, direct) < 1e-10


def test_improving_ratio_basics(circle_plan):
    f = gaussian(256, 3.2, 0.2)
    plan = rotated_plan(circle(), None, 1024, 16)
    assert improving_ratio(f, zero_plan(16)) == 0.0
    with pytest.raises(PreconditionError):
        improving_ratio(PlaneGridFunction(np.zeros((64, 64)), 4.0), plan)
    with pytest.raises(ValueError):
        improving_ratio(f, plan, n=3)
    # direct and spectral give the same ratio; the group route agrees for the plane embedding
    r_s = improving_ratio(f, plan)
    r_d = improving_ratio(f, plan, method="direct")
    assert r_s == pytest.approx(r_d, rel=1e-3)
    r_g = improving_ratio(MotionGridFunction.from_plane(f, 16), plan)
    assert r_g == pytest.approx(r_s, rel=1e-10)


def test_gaussian_family_bounded():
    n, ext = 768, 4.25
    plan = rotated_plan(circle(), None, 1024, 16)
    ratios = [improving_ratio(gaussian(n, ext, s), plan) for s in (0.05, 0.1, 0.15, 0.2, 0.3, 0.4)]
    assert max(ratios) / min(ratios) <= 3


def test_ball_norm_exponent_exact():
    # ||1_B(delta)||_{3/2} = (pi delta^2)^{2/3}
    d = 0.25
    f = ball(1024, 1.0, d, supersample=4)
    assert lp_norm(f, 1.5) == pytest.approx((math.pi * d * d) ** (2 / 3), rel=1e-2)


def test_sharpness_rejects_unresolved_balls():
    plan = rotated_plan(circle(), None, 1024, 4)
    with pytest.raises(UnderResolvedError):
        sharpness_scan(plan, [1 / 64, 1 / 8], n=256, extent=2.5)


def test_small_sharpness_scan():
    plan = rotated_plan(circle(), None, 1024, 8)
    res = sharpness_scan(plan, [1 / 32, 1 / 16, 1 / 8])
    assert abs(res.exponent_f - 4 / 3) <= 0.05
    assert abs(res.exponent_tf - 4 / 3) <= 0.1
    assert res.ratio_variation <= 2
