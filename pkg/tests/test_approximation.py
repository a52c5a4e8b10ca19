import numpy as np
import pytest

from qmhd2d import (
    ConstitutiveParams,
    Grid,
    QMHDSystem,
    RegularizationParams,
    ResistivityProfile,
    SolverOptions,
    State,
)
from qmhd2d.errors import (
    BlowUpError,
    FixedPointDivergenceError,
    IterationLimitError,
    PositivityError,
)
from qmhd2d.spectral import GalerkinBall, GalerkinVelocity

from conftest import full_ball_system, smooth_fields


def make_system(grid, cparams, epsilon=1e-3, lambda_reg=0.0, n_modes=64, s=1):
    reg = RegularizationParams(epsilon=epsilon, lambda_reg=lambda_reg,
                               s=s, n_modes=n_modes)
    return QMHDSystem(grid, cparams, reg)


def rk4_scalar(rhs, y0, dt, n_steps):
    y = y0
    for _ in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


# -- continuity ----------------------------------------------------------------

def test_continuity_rhs_stationary(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n = np.full((32, 32), 1.3)
    u = np.zeros((2, 32, 32))
    assert np.max(np.abs(sys_.continuity_rhs(n, u))) < 1e-14


def test_continuity_rhs_pure_diffusion(grid32, cparams):
    sys_ = make_system(grid32, cparams, epsilon=1e-2)
    n = 1.0 + 0.2 * np.cos(grid32.X) * np.cos(grid32.Y)
    u = np.zeros((2, 32, 32))
    rhs = sys_.continuity_rhs(n, u)
    assert np.max(np.abs(rhs - 1e-2 * grid32.laplacian(n))) < 1e-13
    assert abs(grid32.integrate(rhs)) < 1e-12


def test_continuity_rhs_conserves_mass(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n, u, _ = smooth_fields(grid32)
    assert abs(grid32.integrate(sys_.continuity_rhs(n, u))) < 1e-12


# -- maximum principle ----------------------------------------------------------

def test_envelope_constant_for_divergence_free_velocity(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n0 = 1.0 + 0.3 * np.cos(grid32.X)
    u = grid32.solenoidal_from_stream(0.5 * np.sin(grid32.X + grid32.Y))
    times = np.linspace(0.0, 2.0, 9)
    lower, upper = sys_.max_principle_envelope(n0, times, u)
    assert np.allclose(lower, n0.min(), rtol=1e-12)
    assert np.allclose(upper, n0.max(), rtol=1e-12)


def test_envelope_exponential_rates(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n0 = np.full((32, 32), 0.5)
    n0[0, 0] = 2.0  # extremes 0.5 and 2.0
    u = np.stack([np.sin(grid32.X), np.zeros((32, 32))])  # sup |div u| = 1
    times = np.array([0.0, 1.0])
    lower, upper = sys_.max_principle_envelope(n0, times, u)
    assert lower[1] == pytest.approx(0.5 * np.exp(-1.0), rel=1e-12)
    assert upper[1] == pytest.approx(2.0 * np.exp(1.0), rel=1e-12)


def test_frozen_velocity_transport_respects_envelope(grid32, cparams):
    sys_ = make_system(grid32, cparams, epsilon=1e-2)
    g = grid32
    n0 = 1.0 + 0.4 * np.cos(g.X) * np.cos(g.Y)
    n0 = g.dealias(n0)
    u = 0.3 * np.stack([np.sin(g.X) * np.cos(g.Y), np.sin(g.Y)])
    dt, n_steps = 1e-3, 500
    traj_min, traj_max, times = [n0.min()], [n0.max()], [0.0]
    n = n0
    for i in range(n_steps):
        n = rk4_scalar(lambda x: sys_.continuity_rhs(x, u), n, dt, 1)
        times.append((i + 1) * dt)
        traj_min.append(n.min())
        traj_max.append(n.max())
    lower, upper = sys_.max_principle_envelope(n0, np.array(times), u)
    assert np.all(np.array(traj_min) >= lower - 1e-8)
    assert np.all(np.array(traj_max) <= upper + 1e-8)


# -- induction -------------------------------------------------------------------

def test_induction_rhs_zero_field(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n, u, _ = smooth_fields(grid32)
    assert np.max(np.abs(sys_.induction_rhs(n, u, np.zeros((2, 32, 32))))) == 0.0


def test_induction_rhs_divergence_free(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n, u, B = smooth_fields(grid32)
    rhs = sys_.induction_rhs(n, u, B)
    assert grid32.l2(grid32.div(rhs)) < 1e-12


def test_induction_single_mode_decay_rate(grid32, cparams):
    # constant density => constant resistivity; a single-mode field decays at
    # exp(-nu |k|^2 t) and RK4 reproduces the rate to much better than 1e-6
    p = ConstitutiveParams(gamma=cparams.gamma, gamma_minus=cparams.gamma_minus,
                           c1=cparams.c1, c2=cparams.c2, mu0=cparams.mu0,
                           alpha=cparams.alpha, hbar=cparams.hbar,
                           resistivity=ResistivityProfile().scaled(0.05))
    sys_ = make_system(grid32, p)
    g = grid32
    n = np.ones((32, 32))
    nu = float(p.resistivity(1.0))
    B0 = np.stack([np.sin(g.Y), np.zeros((32, 32))])  # |k| = 1
    u = np.zeros((2, 32, 32))
    dt, n_steps = 1e-2, 100
    B = rk4_scalar(lambda x: sys_.induction_rhs(n, u, x), B0, dt, n_steps)
    expected = np.exp(-nu * n_steps * dt)
    measured = g.l2(B) / g.l2(B0)
    assert measured == pytest.approx(expected, rel=1e-6)


# -- mass operator ----------------------------------------------------------------

def random_coeff(sys_, seed):
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=(2, sys_.grid.nx, sys_.grid.ny))
    return GalerkinVelocity.from_field(sys_.grid, sys_.ball, vals).coeff


def test_mass_apply_identity_for_unit_density(grid32, cparams):
    sys_ = make_system(grid32, cparams, n_modes=40)
    v = random_coeff(sys_, 0)
    out = sys_.mass_operator_apply(np.ones((32, 32)), v)
    assert np.max(np.abs(out - v)) < 1e-12


def test_mass_solve_scalar_density(grid32, cparams):
    sys_ = make_system(grid32, cparams, n_modes=40)
    rhs = random_coeff(sys_, 1)
    out = sys_.mass_operator_solve(np.full((32, 32), 2.0), rhs)
    assert np.max(np.abs(out - rhs / 2.0)) < 1e-11


def test_mass_operator_symmetry_and_positivity(grid32, cparams):
    sys_ = make_system(grid32, cparams, n_modes=40)
    n, _, _ = smooth_fields(grid32, amp=0.3, n_bar=1.0)
    v, w = random_coeff(sys_, 2), random_coeff(sys_, 3)

    def pair(a, b):
        return float(np.sum(a.conj() * b).real) * (2 * np.pi) ** 2 / (32 * 32) ** 2

    assert pair(sys_.mass_operator_apply(n, v), w) == pytest.approx(
        pair(sys_.mass_operator_apply(n, w), v), rel=1e-12)
    quad = pair(sys_.mass_operator_apply(n, v), v)
    assert quad >= float(n.min()) * pair(v, v) - 1e-10


def test_mass_apply_solve_round_trip(grid32, cparams):
    sys_ = make_system(grid32, cparams, n_modes=64)
    n, _, _ = smooth_fields(grid32, amp=0.3, n_bar=1.0)
    rhs = random_coeff(sys_, 4)
    v = sys_.mass_operator_solve(n, rhs, tol=1e-13)
    back = sys_.mass_operator_apply(n, v)
    rel = np.linalg.norm(back - rhs) / np.linalg.norm(rhs)
    assert rel <= 1e-10


def test_mass_solve_guards(grid32, cparams):
    sys_ = make_system(grid32, cparams, n_modes=40)
    rhs = random_coeff(sys_, 5)
    with pytest.raises(PositivityError):
        sys_.mass_operator_solve(np.full((32, 32), 1e-9), rhs, density_floor=1e-6)
    n, _, _ = smooth_fields(grid32, amp=0.45, n_bar=1.0)
    with pytest.raises(IterationLimitError):
        sys_.mass_operator_solve(n, rhs, tol=1e-14, max_iters=1)


def test_mass_inverse_lipschitz_in_density(grid32, cparams):
    # ||M^-1[n1] r - M^-1[n2] r|| <= C ||n1 - n2||_L2 ||r|| with a stable C
    sys_ = make_system(grid32, cparams, n_modes=40)
    g = grid32
    n, _, _ = smooth_fields(g, amp=0.3, n_bar=1.0)
    rhs = random_coeff(sys_, 6)
    base = sys_.mass_operator_solve(n, rhs, tol=1e-13)
    rnorm = np.linalg.norm(rhs)
    rng = np.random.default_rng(7)
    consts = []
    for _ in range(10):
        eta = g.dealias(rng.normal(size=(32, 32)))
        eta /= np.abs(eta).max()
        pert = sys_.mass_operator_solve(n + 1e-3 * eta, rhs, tol=1e-13)
        consts.append(np.linalg.norm(pert - base)
                      / (g.l2(1e-3 * eta) * rnorm))
    consts = np.array(consts)
    assert np.all(np.isfinite(consts))
    assert consts.max() <= 3.0 * consts.min()


# -- momentum operator ---------------------------------------------------------------

def test_momentum_operator_constant_state_vanishes(grid32, cparams):
    sys_ = make_system(grid32, cparams, epsilon=1e-3, lambda_reg=1e-6)
    st = sys_.constant_state(1.4, (0.2, -0.3))
    out = sys_.momentum_operator(st.u.values, st.u.values, st.n, st.B)
    assert np.max(np.abs(out)) < 1e-12


def test_momentum_operator_magnetic_only_is_lorentz_projection(grid32, cparams):
    sys_ = make_system(grid32, cparams, epsilon=0.0)
    g = grid32
    n = np.full((32, 32), 1.2)
    u = np.zeros((2, 32, 32))
    _, _, B = smooth_fields(g)
    out = sys_.momentum_operator(u, u, n, B)
    expected = sys_.ball.mask * g.to_spectral(g.dealias(g.lorentz(B)))
    scale = max(np.abs(expected).max(), 1.0)
    assert np.max(np.abs(out - expected)) <= 1e-10 * scale


def test_momentum_quantum_term_alpha1_reduction(grid32, cparams):
    # at alpha = 1 the quantum contribution is the projection of
    # (hbar^2/2) n grad(Lap n)
    g = grid32
    base = dict(gamma=2.0, gamma_minus=5.0, c1=0.1, c2=0.1, mu0=0.1,
                resistivity=ResistivityProfile().scaled(0.05))
    with_q = make_system(g, ConstitutiveParams(alpha=1.0, hbar=0.4, **base),
                         epsilon=0.0)
    p_noq = ConstitutiveParams(alpha=1.0, hbar=0.0, **base)
    no_q = QMHDSystem(g, p_noq, with_q.reg)
    n, u, _ = smooth_fields(g)
    n = g.dealias(n)
    B = np.zeros((2, 32, 32))
    quantum = (with_q.momentum_operator(u, u, n, B)
               - no_q.momentum_operator(u, u, n, B))
    direct = with_q.ball.mask * g.to_spectral(
        g.dealias(0.5 * 0.4**2 * n * g.grad(g.laplacian(n))))
    scale = max(np.abs(direct).max(), 1e-30)
    assert np.max(np.abs(quantum - direct)) <= 1e-10 * scale


# -- fixed point and integrators ------------------------------------------------------

def test_fixed_point_constant_state_converges_immediately(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    st = sys_.constant_state(1.1, (0.0, 0.2))
    opts = SolverOptions(dt=1e-2, t_end=1.0, integrator="imex")
    (n1, u1, B1), record = sys_.fixed_point_solve(st, opts.dt, opts)
    assert record.iterations == 1 and record.converged
    assert np.max(np.abs(n1 - st.n)) < 1e-14
    assert u1.coeff_norm() < 1e-14


def test_fixed_point_contracts_on_smooth_state(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n, u, B = smooth_fields(grid32)
    st = sys_.make_state(n, u, B)
    opts = SolverOptions(dt=2e-3, t_end=1.0, integrator="imex", fp_tol=1e-12)
    _, record = sys_.fixed_point_solve(st, opts.dt, opts)
    assert record.converged
    assert all(r < 1.0 for r in record.ratios)


def test_fixed_point_divergence_raises(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n, u, B = smooth_fields(grid32, amp=0.2)
    st = sys_.make_state(n, u, B)
    opts = SolverOptions(dt=5.0, t_end=10.0, integrator="imex",
                         fp_max_iters=8)
    with pytest.raises((FixedPointDivergenceError, BlowUpError, PositivityError)):
        sys_.fixed_point_solve(st, opts.dt, opts)


def test_imex_agrees_with_rk4_at_second_order(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n, u, B = smooth_fields(grid32)
    T = 0.04
    diffs = []
    for dt in (4e-3, 2e-3):
        st_rk = sys_.make_state(n, u, B)
        st_im = sys_.make_state(n, u, B)
        res_rk = sys_.run(st_rk, SolverOptions(dt=dt, t_end=T))
        res_im = sys_.run(st_im, SolverOptions(dt=dt, t_end=T,
                                               integrator="imex", fp_tol=1e-12))
        d = (grid32.l2(res_rk.final_state.n - res_im.final_state.n)
             + grid32.l2(res_rk.final_state.u.values - res_im.final_state.u.values))
        diffs.append(d)
    order = np.log2(diffs[0] / diffs[1])
    assert order > 1.7


# -- step / run -------------------------------------------------------------------

def test_constant_state_preserved(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    st = sys_.constant_state(1.2, (0.1, -0.2))
    res = sys_.run(st, SolverOptions(dt=1e-3, t_end=0.1))
    fin = res.final_state
    assert fin.u.coeff_norm() <= 1e-12
    assert grid32.l2(fin.n - 1.2) <= 1e-12
    assert grid32.l2(fin.B[0] - 0.1) + grid32.l2(fin.B[1] + 0.2) <= 1e-12


def test_run_conserves_mass_and_divergence(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n, u, B = smooth_fields(grid32)
    st = sys_.make_state(n, u, B)
    res = sys_.run(st, SolverOptions(dt=2e-3, t_end=0.2), cadence=10)
    masses = np.array([row["mass"] for row in res.rows])
    assert np.max(np.abs(masses - masses[0])) <= 1e-10 * abs(masses[0])
    assert max(row["div_b_l2"] for row in res.rows) <= 1e-11


def test_rk4_fourth_order_richardson(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n, u, B = smooth_fields(grid32)
    T = 0.064
    finals = []
    for dt in (4e-3, 2e-3, 1e-3):
        st = sys_.make_state(n, u, B)
        finals.append(sys_.run(st, SolverOptions(dt=dt, t_end=T)).final_state)
    d1 = grid32.l2(finals[0].n - finals[1].n) + grid32.l2(
        finals[0].u.values - finals[1].u.values)
    d2 = grid32.l2(finals[1].n - finals[2].n) + grid32.l2(
        finals[1].u.values - finals[2].u.values)
    assert np.log2(d1 / d2) > 3.5


def test_velocity_support_stays_in_ball(grid32, cparams):
    sys_ = make_system(grid32, cparams, n_modes=24)
    n, u, B = smooth_fields(grid32)
    st = sys_.make_state(n, u, B)
    res = sys_.run(st, SolverOptions(dt=2e-3, t_end=0.02))
    assert np.all(res.final_state.u.coeff[:, ~sys_.ball.mask] == 0.0)


def test_run_detects_blow_up(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    st = sys_.constant_state(1.0)
    st.B = st.B + 1e160 * grid32.solenoidal_from_stream(np.cos(grid32.X))
    with pytest.raises(BlowUpError):
        sys_.run(st, SolverOptions(dt=1e-3, t_end=0.01))


def test_run_detects_positivity_loss(grid32, cparams):
    sys_ = make_system(grid32, cparams)
    n, u, B = smooth_fields(grid32)
    st = sys_.make_state(n, u, B)
    with pytest.raises(PositivityError):
        sys_.run(st, SolverOptions(dt=1e-3, t_end=0.01, density_floor=2.0))
