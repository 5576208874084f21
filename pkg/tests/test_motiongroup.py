import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motionconv.core import MotionGridFunction, PlaneGridFunction, PreconditionError
from motionconv.geometry import GraphFamily, RotatedFamily, circle
from motionconv.inputs import gaussian
from motionconv.motiongroup import (
    OMEGA_2,
    ConvergenceError,
    RepnKernel,
    SpectralLeakageError,
    calibrate_omega,
    calibration_functions,
    geometric_grid,
    heldout_functions,
    hs_norm,
    identity_kernel,
    op_norm,
    opnorm_scan,
    plancherel_check,
    repn_kernel,
    repn_measure_kernel,
)
from motionconv.radon import apply_spectral, motion_convolve_functions, rotated_plan

LAMS = geometric_grid(0.25, 8, 64)


def angle_independent_gaussian(n=64, ext=2.0, m_ang=16, sigma=0.3):
    g = gaussian(n, ext, sigma)
    return MotionGridFunction.from_plane(g, m_ang)


def test_zero_function_zero_kernel():
    f = MotionGridFunction(np.zeros((32, 32, 8)), 2.0)
    k = repn_kernel(f, 1.0)
    assert not np.any(k.matrix)
    assert hs_norm(k) == 0 and op_norm(k) == 0


def test_angle_independent_kernel_is_constant_along_u():
    k = repn_kernel(angle_independent_gaussian(), 1.5).matrix
    assert np.allclose(k, k[0][None, :], atol=1e-14)
    assert np.linalg.matrix_rank(k, tol=1e-10 * np.abs(k).max()) <= 1


def test_hs_norm_against_analytic_double_integral():
    # f(x, theta) = g(x): int int |g^(lam R_{-v} e1)|^2 dw dv = |g^(lam)|^2, g^ = 2 pi s^2 exp(-2 pi^2 s^2 lam^2)
    sigma, lam = 0.3, 1.5
    k = repn_kernel(angle_independent_gaussian(sigma=sigma), lam)
    exact = 2 * math.pi * sigma**2 * math.exp(-2 * math.pi**2 * sigma**2 * lam**2)
    assert hs_norm(k) == pytest.approx(exact, rel=1e-3)


def test_band_precondition():
    f = angle_independent_gaussian()
    with pytest.raises(PreconditionError):
        repn_kernel(f, 100.0)
    with pytest.raises(PreconditionError):
        repn_kernel(f, 0.0)


def test_hs_norm_examples(rng):
    m = 24
    assert hs_norm(RepnKernel(1.0, np.zeros((m, m)))) == 0
    assert hs_norm(RepnKernel(1.0, np.ones((m, m)))) == pytest.approx(1.0, rel=1e-15)
    a = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    naive = math.sqrt(sum(abs(a[i, j]) ** 2 for i in range(m) for j in range(m)) / m**2)
    assert hs_norm(RepnKernel(1.0, a)) == pytest.approx(naive, rel=1e-12)


def test_op_norm_rank_one():
    m = 32
    u = np.linspace(0, 2 * np.pi, m, endpoint=False)
    a, b = 1 + 0.5 * np.cos(u), np.exp(1j * u) * (2 + np.sin(2 * u))
    k = RepnKernel(1.0, np.outer(a, b))
    # weighted: ||K/M|| = sqrt(sum a^2 / M) sqrt(sum |b|^2 / M)
    expected = math.sqrt(np.sum(a**2) / m) * math.sqrt(np.sum(np.abs(b) ** 2) / m)
    assert op_norm(k) == pytest.approx(expected, rel=1e-8)


@settings(max_examples=15)
@given(st.integers(0, 2**31 - 1))
def test_op_norm_against_dense_svd(seed):
    r = np.random.default_rng(seed)
    a = r.normal(size=(64, 64)) + 1j * r.normal(size=(64, 64))
    k = RepnKernel(1.0, a)
    svd = np.linalg.svd(a / 64, compute_uv=False)[0]
    assert op_norm(k) == pytest.approx(svd, rel=1e-6)
    assert op_norm(k) <= hs_norm(k) * (1 + 1e-10)


def test_op_norm_reports_nonconvergence():
    a = np.diag(np.arange(1, 9, dtype=complex))
    with pytest.raises(ConvergenceError) as exc:
        op_norm(RepnKernel(1.0, a), max_iter=1)
    lo, hi = exc.value.bracket
    assert lo <= 1.0 <= hi


def test_identity_kernel_norms():
    k = identity_kernel(2.0, 16)
    assert op_norm(k) == pytest.approx(1.0)
    # the identity is not Hilbert-Schmidt: on M angles its HS norm is sqrt(M)
    assert hs_norm(k) == pytest.approx(4.0)


def unitarity_kernels(n=128, ext=2.0, m_ang=64, lam=2.0):
    # f = Gaussian in x times a von Mises bump in angle, both normalized, shrinking to the identity
    th = np.arange(m_ang) * 2 * np.pi / m_ang
    for sigma, kappa in ((0.2, 10.0), (0.1, 40.0), (0.05, 160.0), (0.025, 640.0)):
        g = gaussian(n, ext, sigma).samples
        g = g / (g.sum() * (2 * ext / n) ** 2)
        b = np.exp(kappa * (np.cos(th) - 1))
        b = b / b.mean()
        f = MotionGridFunction(g[:, :, None] * b[None, None, :], ext)
        yield repn_kernel(f, lam) - identity_kernel(lam, m_ang)


def test_unitarity_surrogate():
    # top singular values of pi(f) - I cluster (relative gaps ~1e-6), so measure with a dense SVD
    dists = [np.linalg.svd(k.weighted(), compute_uv=False)[0] for k in unitarity_kernels()]
    assert all(x > y for x, y in zip(dists, dists[1:]))
    assert dists[-1] < 0.25


def test_clustered_spectrum_is_reported_not_guessed():
    k = next(unitarity_kernels())
    with pytest.raises(ConvergenceError) as exc:
        op_norm(k, max_iter=200)
    lo, hi = exc.value.bracket
    assert lo <= np.linalg.svd(k.weighted(), compute_uv=False)[0] <= hi


@pytest.mark.parametrize("lam", [2.0, 3.0])
def test_convolution_homomorphism(lam):
    # pi(f * g) = pi(g) pi(f): kernel(f * g) = K_g K_f / M
    f = band_limited = heldout_functions()[1]
    g = heldout_functions()[2]
    h = motion_convolve_functions(f, g)
    kh, kf, kg = repn_kernel(h, lam), repn_kernel(f, lam), repn_kernel(g, lam)
    pred = kg.compose(kf)
    assert hs_norm(kh - pred) / hs_norm(kh) <= 0.02
    assert band_limited is f


def test_hs_refinement_in_angles():
    a = repn_kernel(heldout_functions(n_angles=32)[0], 2.5)
    b = repn_kernel(heldout_functions(n_angles=64)[0], 2.5)
    assert abs(hs_norm(a) / hs_norm(b) - 1) < 0.01


def test_plancherel_zero_and_homogeneity():
    assert plancherel_check(MotionGridFunction(np.zeros((64, 64, 32)), 2.0), LAMS) == 0.0
    f = heldout_functions()[0]
    e1 = plancherel_check(f, LAMS)
    e2 = plancherel_check(MotionGridFunction(2 * f.samples, 2.0), LAMS)
    assert e1 == pytest.approx(e2, abs=1e-12)


def test_plancherel_leakage_is_flagged():
    f = angle_independent_gaussian(sigma=0.05, m_ang=32)
    with pytest.raises(SpectralLeakageError):
        plancherel_check(f, geometric_grid(2.0, 8, 16))


def test_omega_calibration_is_frozen():
    omega = calibrate_omega(calibration_functions(), LAMS)
    assert omega == pytest.approx(OMEGA_2, rel=1e-9)
    # the polar-coordinates value 1/(2 pi) is within the 5% budget
    assert abs(omega * 2 * math.pi - 1) < 0.05


def test_plancherel_heldout():
    for f in heldout_functions():
        assert plancherel_check(f, LAMS) <= 0.05


# ------------------------------------------------------ measure kernels


CIRCLE = RotatedFamily(circle(), None)


def test_measure_kernel_z0_against_mollified_realization():
    # F = gamma_theta * (thin Gaussian): repn_kernel(F) approximates pi(mu) up to g^(lam)
    n, ext, m_ang, eps, lam = 320, 1.6, 32, 0.02, 1.0
    g = gaussian(n, ext, eps)
    g = PlaneGridFunction(g.samples / (g.samples.sum() * g.h**2), ext)
    F = apply_spectral(g, rotated_plan(circle(), None, 1024, m_ang), periodic=True)
    k1 = repn_kernel(F, lam)
    k2 = repn_measure_kernel(CIRCLE, 0, lam, m_ang, m=1024)
    assert hs_norm(k1 - k2) / hs_norm(k2) <= 0.02


def test_measure_kernel_zero_weight():
    fam = GraphFamily(lambda x, th: x**2 + 1, lambda x, th: 0 * x, -1.0, 1.0)
    assert not np.any(repn_measure_kernel(fam, complex(-0.5, 1), 2.0, 16).matrix)
    scan = opnorm_scan(fam, 0.0, [1, 2, 4], 16)
    assert np.all(scan.values == 0)


def test_measure_kernel_modulus_in_s():
    lam, m_ang = 4.0, 32
    k0 = repn_measure_kernel(CIRCLE, -0.5, lam, m_ang).matrix
    v = np.arange(m_ang) * 2 * np.pi / m_ang
    for s in (0.0, 1.0, -2.0):
        ks = repn_measure_kernel(CIRCLE, complex(-0.5, s), lam, m_ang).matrix
        scale = np.exp(s * np.pi * np.sign(np.round(np.cos(v), 12)) / 2)
        assert np.allclose(np.abs(ks), np.abs(k0) * scale[None, :], rtol=1e-10, atol=1e-12)


def test_measure_kernel_rejects_bad_lambda():
    with pytest.raises(PreconditionError):
        repn_measure_kernel(CIRCLE, -0.5, 0.0, 16)


def test_z0_circle_kernel_is_rank_one_bessel():
    # rotated circle: mu_k^(xi) = 2 pi J0(2 pi lam) for every k, so ||pi(mu)|| = 2 pi |J0(2 pi lam)|
    from scipy.special import j0

    for lam in (1.0, 4.0, 16.0):
        val = op_norm(repn_measure_kernel(CIRCLE, 0, lam, 64))
        assert val == pytest.approx(2 * math.pi * abs(j0(2 * math.pi * lam)), rel=1e-6)


def test_singular_column_sensitivity():
    for lam in (1.0, 8.0, 64.0):
        a = op_norm(repn_measure_kernel(CIRCLE, -0.5, lam, 128))
        b = op_norm(repn_measure_kernel(CIRCLE, -0.5, lam, 128, singular="shift"))
        assert abs(a - b) / a <= 0.02


def test_opnorm_scan_uniform_for_circle():
    scan = opnorm_scan(CIRCLE, 0.0, [1, 2, 4, 8, 16, 32, 64], 128)
    assert scan.sup_over_median <= 2
    assert abs(scan.slope()) < 0.05
