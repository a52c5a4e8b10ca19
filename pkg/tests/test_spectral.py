import numpy as np
import pytest

from qmhd2d import Grid
from qmhd2d.spectral import GalerkinBall, GalerkinVelocity


def random_smooth(grid, seed, k_max=5):
    rng = np.random.default_rng(seed)
    spec = np.zeros((grid.nx, grid.ny), dtype=complex)
    for kx in range(-k_max, k_max + 1):
        for ky in range(-k_max, k_max + 1):
            if (kx, ky) == (0, 0) or (kx, ky) > (-kx, -ky):
                continue
            c = rng.normal() + 1j * rng.normal()
            spec[kx % grid.nx, ky % grid.ny] = c
            spec[(-kx) % grid.nx, (-ky) % grid.ny] = np.conj(c)
    return grid.to_real(spec)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(6)
    with pytest.raises(ValueError):
        Grid(33)


def test_transform_round_trip(grid32):
    f = random_smooth(grid32, 1)
    back = grid32.to_real(grid32.to_spectral(f))
    assert np.max(np.abs(back - f)) < 1e-13


def test_grad_of_single_mode(grid32):
    g = grid32
    f = np.sin(g.X)
    gf = g.grad(f)
    assert np.max(np.abs(gf[0] - np.cos(g.X))) < 1e-12
    assert np.max(np.abs(gf[1])) < 1e-12


def test_div_grad_is_laplacian(grid32):
    f = random_smooth(grid32, 2)
    assert np.max(np.abs(grid32.div(grid32.grad(f)) - grid32.laplacian(f))) < 1e-12


def test_laplacian_of_constant_vanishes(grid32):
    f = np.full((32, 32), 2.7)
    assert np.max(np.abs(grid32.laplacian(f))) < 1e-12


def test_hyper_is_symbol_power(grid32):
    g = grid32
    f = np.cos(3 * g.X + 2 * g.Y)
    k2 = 3**2 + 2**2
    for k in (1, 2, 3):
        assert np.max(np.abs(g.hyper(f, k) - (-k2) ** k * f)) < 1e-10 * k2**k
    f2 = random_smooth(g, 3)
    assert np.max(np.abs(g.hyper(f2, 1) - g.laplacian(f2))) < 1e-12


def test_parseval_seminorms(grid32):
    # integral of |grad^m f|^2 assembled by repeated differentiation matches
    # the Parseval weight |k|^(2m)
    g = grid32
    f = random_smooth(g, 4)
    g1 = g.grad(f)
    g2 = np.stack([g.grad(g1[0]), g.grad(g1[1])])
    g3 = np.stack([g.grad(g2[i, j]) for i in range(2) for j in range(2)])
    for m, fld in ((1, g1), (2, g2), (3, g3)):
        direct = g.inner(fld, fld)
        assert abs(direct - g.sobolev_seminorm_sq(f, m)) <= 1e-10 * max(direct, 1.0)


def test_integration_by_parts(grid32):
    g = grid32
    f = random_smooth(g, 5)
    v = np.stack([random_smooth(g, 6), random_smooth(g, 7)])
    lhs = g.integrate(f * g.div(v))
    rhs = -g.inner(g.grad(f), v)
    assert abs(lhs - rhs) < 1e-11 * max(abs(lhs), 1.0)


def test_curl_emf_lorentz_identities(grid32):
    g = grid32
    B_uniform = np.stack([np.full((32, 32), 0.4), np.full((32, 32), -1.1)])
    assert np.max(np.abs(g.lorentz(B_uniform))) < 1e-12
    u = np.stack([random_smooth(g, 8), random_smooth(g, 9)])
    assert np.max(np.abs(g.emf(u, u))) == 0.0
    e = random_smooth(g, 10)
    assert np.max(np.abs(g.div(g.curl_scalar(e)))) < 1e-12


def test_gradient_decomposition_pointwise(grid32):
    g = grid32
    u = np.stack([random_smooth(g, 11), random_smooth(g, 12)])
    full = g.grad_tensor(u)
    D = g.sym_grad(u)
    A = g.antisym_grad(u)
    lhs = np.sum(full**2, axis=(0, 1))
    rhs = np.sum(D**2, axis=(0, 1)) + np.sum(A**2, axis=(0, 1))
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_rigid_rotation_analog_is_shear_free_near_origin(grid32):
    # periodic analog of u = (-y, x): symmetric gradient vanishes to second
    # order around the origin while the rotation part stays order one
    g = grid32
    u = np.stack([-np.sin(g.Y), np.sin(g.X)])
    D = g.sym_grad(u)
    A = g.antisym_grad(u)
    near = (np.abs(((g.X + np.pi) % (2 * np.pi)) - np.pi) < 0.3) & (
        np.abs(((g.Y + np.pi) % (2 * np.pi)) - np.pi) < 0.3)
    d_near = np.max(np.abs(D[:, :, near]))
    a_scale = np.max(np.abs(A))
    assert d_near < 0.05 * a_scale


def test_dealias_idempotent_and_kills_high_modes(grid32):
    g = grid32
    f = random_smooth(g, 13) + 0.5 * np.cos(14 * g.X)
    once = g.dealias(f)
    assert np.max(np.abs(g.dealias(once) - once)) < 1e-14
    spec = g.to_spectral(once)
    assert np.max(np.abs(spec[~g.dealias_mask])) < 1e-10


def test_galerkin_ball_nested_and_symmetric(grid32):
    b16 = GalerkinBall.build(grid32, 16)
    b32 = GalerkinBall.build(grid32, 32)
    assert b16.count >= 16 and b32.count >= 32
    assert np.all(b32.mask[b16.mask])
    # symmetric under k -> -k: projection of a real field stays real
    f = np.stack([random_smooth(grid32, 14), random_smooth(grid32, 15)])
    u = GalerkinVelocity.from_field(grid32, b16, f)
    spec_back = grid32.to_spectral(u.values)
    assert np.max(np.abs(spec_back - u.coeff)) < 1e-9


def test_galerkin_projection_orthogonal(grid32):
    g = grid32
    ball = GalerkinBall.build(g, 20)
    f = random_smooth(g, 16)
    h = random_smooth(g, 17)
    Pf = g.project(f, ball.mask)
    Ph = g.project(h, ball.mask)
    assert np.max(np.abs(g.project(Pf, ball.mask) - Pf)) < 1e-13  # idempotent
    assert abs(g.inner(Pf, h) - g.inner(f, Ph)) < 1e-11           # self-adjoint


def test_galerkin_velocity_support_and_norm(grid32):
    g = grid32
    ball = GalerkinBall.build(g, 12)
    f = np.stack([random_smooth(g, 18), random_smooth(g, 19)])
    u = GalerkinVelocity.from_field(g, ball, f)
    assert np.all(u.coeff[:, ~ball.mask] == 0)
    direct = np.sqrt(g.inner(u.values, u.values))
    assert u.coeff_norm() == pytest.approx(direct, rel=1e-12)


def test_galerkin_ball_must_fit_dealias_region(grid32):
    with pytest.raises(ValueError):
        GalerkinBall.build(grid32, GalerkinBall.max_modes(grid32) + 1)
