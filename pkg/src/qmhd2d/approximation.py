"""Three-level Faedo-Galerkin solver for the quantum MHD system.

The density obeys the continuity equation with artificial diffusion
epsilon * Lap(n), the in-plane magnetic field obeys resistive induction in
curl form (so div B = 0 is preserved exactly), and the velocity lives in a
finite Galerkin ball where its coefficients satisfy

    d/dt <M[n] u, psi> = <N[u, n, B], psi>    for every ball mode psi,

with M[n] the density-weighted mass operator and N the momentum form
(convection, pressure, quantum stress, viscous stresses, hyper-regularization
and the diffusion-compensation term, Lorentz force).

Time stepping is method-of-lines: explicit RK4 by default, or an implicit
midpoint update solved by Picard fixed-point iteration ("imex") for the stiff
regularization terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constitutive as laws
from .constitutive import ConstitutiveParams
from .errors import (
    BlowUpError,
    FixedPointDivergenceError,
    IterationLimitError,
    PositivityError,
)
from .spectral import GalerkinBall, GalerkinVelocity, Grid

__all__ = [
    "RegularizationParams",
    "SolverOptions",
    "State",
    "FixedPointRecord",
    "RunResult",
    "QMHDSystem",
    "suggest_dt",
]


@dataclass(frozen=True)
class RegularizationParams:
    """Knobs of the three-level approximation: artificial density diffusion
    epsilon, hyper-regularization amplitude lambda_reg with order s, and the
    Galerkin mode count n_modes.  epsilon = lambda_reg = 0 is the target
    (unregularized) system."""

    epsilon: float = 0.0
    lambda_reg: float = 0.0
    s: int = 1
    n_modes: int = 64

    def __post_init__(self):
        if self.epsilon < 0 or self.lambda_reg < 0:
            raise ValueError("epsilon and lambda_reg must be >= 0")
        if self.s < 1:
            raise ValueError("hyper order s must be >= 1")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")


@dataclass(frozen=True)
class SolverOptions:
    dt: float = 1e-3
    t_end: float = 1.0
    integrator: str = "rk4"
    fp_tol: float = 1e-10
    fp_max_iters: int = 50
    density_floor: float = 1e-6

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.t_end <= 0:
            raise ValueError("t_end must be > 0")
        if self.integrator not in ("rk4", "imex"):
            raise ValueError("integrator must be 'rk4' or 'imex'")
        if self.fp_tol <= 0:
            raise ValueError("fp_tol must be > 0")
        if self.fp_max_iters < 1:
            raise ValueError("fp_max_iters must be >= 1")
        if self.density_floor <= 0:
            raise ValueError("density_floor must be > 0")


@dataclass
class State:
    """Simulation state: density field, Galerkin velocity, in-plane magnetic
    field, at time t."""

    t: float
    n: np.ndarray
    u: GalerkinVelocity
    B: np.ndarray

    def copy(self) -> "State":
        return State(self.t, self.n.copy(), self.u.copy(), self.B.copy())

    def is_finite(self) -> bool:
        return bool(
            np.isfinite(self.n).all()
            and np.isfinite(self.u.coeff).all()
            and np.isfinite(self.B).all()
        )


@dataclass
class FixedPointRecord:
    iterations: int
    diffs: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def ratios(self) -> list[float]:
        return [
            b / a for a, b in zip(self.diffs, self.diffs[1:]) if a > 0.0
        ]


@dataclass
class RunResult:
    times: list[float]
    rows: list[dict]
    states: list[State] | None
    final_state: State


class QMHDSystem:
    """Binds a grid, the constitutive parameters, and the regularization
    parameters; provides the semi-discrete right-hand sides, the mass
    operator, and the time steppers."""

    def __init__(self, grid: Grid, cparams: ConstitutiveParams,
                 reg: RegularizationParams):
        self.grid = grid
        self.cparams = cparams
        self.reg = reg
        self.ball = GalerkinBall.build(grid, reg.n_modes)

    # -- state construction -------------------------------------------------

    def make_state(self, n, u_vals, B, t=0.0) -> State:
        """Build a state from collocation fields; u is projected onto the
        Galerkin ball and n, B onto the dealias region."""
        g = self.grid
        n = g.dealias(np.asarray(n, dtype=float))
        B = g.dealias(np.asarray(B, dtype=float))
        u = GalerkinVelocity.from_field(g, self.ball, u_vals)
        return State(t=float(t), n=n, u=u, B=B)

    def constant_state(self, n_bar=1.0, B_bar=(0.0, 0.0), t=0.0) -> State:
        g = self.grid
        n = np.full((g.nx, g.ny), float(n_bar))
        B = np.stack([
            np.full((g.nx, g.ny), float(B_bar[0])),
            np.full((g.nx, g.ny), float(B_bar[1])),
        ])
        return State(t=float(t), n=n,
                     u=GalerkinVelocity.zeros(g, self.ball), B=B)

    # -- semi-discrete right-hand sides --------------------------------------

    def continuity_rhs(self, n, u_vals):
        """-div(n u) + epsilon Lap(n), dealiased.  Both terms integrate to
        zero on the torus, so total mass is conserved exactly."""
        g = self.grid
        out = -g.div(g.dealias(n * u_vals))
        if self.reg.epsilon > 0:
            out = out + self.reg.epsilon * g.laplacian(n)
        return g.dealias(out)

    def induction_rhs(self, n, u_vals, B):
        """curl-form induction: the right-hand side is the in-plane curl of
        (emf - nu_b(n) * current), hence exactly divergence-free."""
        g = self.grid
        e = g.dealias(g.emf(u_vals, B))
        j = g.curl2(B)
        f = g.dealias(laws.resistivity(n, self.cparams) * j)
        return g.curl_scalar(e - f)

    def momentum_operator(self, u_adv, u_N, n, B):
        """Dual coefficients of the momentum form tested against every ball
        mode.  u_adv is the advecting velocity, u_N the advected one; the two
        coincide except inside fixed-point sweeps.  Assembled in strong form
        (spectral integration by parts is exact) with the 2/3 rule applied
        after every pointwise product."""
        g = self.grid
        p = self.cparams
        da = g.dealias

        m = da(n * u_adv)
        conv = np.einsum("i...,j...->ij...", u_N, m)  # T[i,j] = u_N_i m_j
        R = -g.div_tensor(da(conv))

        R -= g.grad(da(laws.pressure(n, p) + laws.cold_pressure(n, p)))

        if p.hbar > 0:
            phi = da(laws.dispersion(n, p))
            gq = da(laws.dispersion_deriv(n, p) * g.laplacian(phi))
            R -= 0.5 * p.hbar**2 * da(gq * g.grad(n))
            R += 0.5 * p.hbar**2 * g.grad(da(n * gq))

        mu = da(laws.shear_viscosity(n, p))
        R += 2.0 * g.div_tensor(da(mu * g.sym_grad(u_N)))
        lam_v = da(laws.bulk_viscosity(n, p))
        R += g.grad(da(lam_v * g.div(u_N)))

        if self.reg.lambda_reg > 0:
            lam, s = self.reg.lambda_reg, self.reg.s
            mN = da(n * u_N)
            R += lam * da(n * g.hyper(mN, 2 * s + 1))
            R += lam * da(n * g.grad(g.hyper(n, 2 * s + 1)))

        if self.reg.epsilon > 0:
            gn = g.grad(n)
            gu = g.grad_tensor(u_adv)
            R -= self.reg.epsilon * da(np.einsum("j...,ij...->i...", gn, gu))

        R += da(g.lorentz(B))

        return self.ball.mask * g.to_spectral(R)

    # -- density-weighted mass operator --------------------------------------

    def mass_operator_apply(self, n, coeff):
        """Galerkin projection of n * v onto the ball: pointwise multiply on
        collocation values, then project.  Symmetric positive definite
        whenever min n > 0 (the ball lies inside the dealias region)."""
        g = self.grid
        return self.ball.mask * g.to_spectral(n * g.to_real(coeff))

    def mass_operator_solve(self, n, rhs, x0=None, tol=1e-12, max_iters=500,
                            density_floor=1e-6):
        """Solve M[n] v = rhs by conjugate gradients on the ball coefficients.

        Raises PositivityError when min n < density_floor (the operator loses
        definiteness) and IterationLimitError with the final relative
        residual if CG stalls.
        """
        n_min = float(n.min())
        if n_min < density_floor:
            raise PositivityError(
                f"density minimum {n_min:.3e} below floor {density_floor:.3e}; "
                "mass operator not safely invertible"
            )

        def ip(a, b):
            return float(np.sum(a.conj() * b).real)

        b_norm = np.sqrt(ip(rhs, rhs))
        if not np.isfinite(b_norm):
            raise BlowUpError("non-finite momentum assembly handed to the mass solve")
        if b_norm == 0.0:
            return np.zeros_like(rhs)
        x = x0.copy() if x0 is not None else rhs / float(n.mean())
        r = rhs - self.mass_operator_apply(n, x)
        p = r.copy()
        rs = ip(r, r)
        for _ in range(max_iters):
            if np.sqrt(rs) <= tol * b_norm:
                return x
            Ap = self.mass_operator_apply(n, p)
            pAp = ip(p, Ap)
            if pAp <= 0.0:
                raise PositivityError(
                    "mass operator lost positive definiteness during CG"
                )
            alpha = rs / pAp
            x = x + alpha * p
            r = r - alpha * Ap
            rs_new = ip(r, r)
            p = r + (rs_new / rs) * p
            rs = rs_new
        if np.sqrt(rs) <= tol * b_norm:
            return x
        raise IterationLimitError(
            f"mass-operator CG did not reach tol={tol:g} in {max_iters} iterations",
            residual=float(np.sqrt(rs) / b_norm),
        )

    # -- coupled right-hand side for explicit stepping ------------------------

    def _rhs(self, n, u_coeff, B, options: SolverOptions, x0=None):
        """(dn/dt, du/dt coefficients, dB/dt).  The velocity equation is
        du/dt = M^-1[n] (N_dual - P(dn/dt * u)), unfolding the product rule
        on d/dt (M[n] u)."""
        g = self.grid
        u_vals = g.to_real(u_coeff)
        ndot = self.continuity_rhs(n, u_vals)
        Bdot = self.induction_rhs(n, u_vals, B)
        Ndual = self.momentum_operator(u_vals, u_vals, n, B)
        mdot_dual = self.ball.mask * g.to_spectral(ndot * u_vals)
        udot = self.mass_operator_solve(
            n, Ndual - mdot_dual, x0=x0,
            tol=min(1e-12, options.fp_tol),
            density_floor=options.density_floor,
        )
        return ndot, udot, Bdot

    # -- time steppers ---------------------------------------------------------

    def step_rk4(self, state: State, options: SolverOptions, _cache=None) -> State:
        dt = options.dt
        n0, c0, B0 = state.n, state.u.coeff, state.B
        cache = _cache if _cache is not None else [None] * 4

        k1 = self._rhs(n0, c0, B0, options, x0=cache[0])
        k2 = self._rhs(n0 + 0.5 * dt * k1[0], c0 + 0.5 * dt * k1[1],
                       B0 + 0.5 * dt * k1[2], options, x0=cache[1])
        k3 = self._rhs(n0 + 0.5 * dt * k2[0], c0 + 0.5 * dt * k2[1],
                       B0 + 0.5 * dt * k2[2], options, x0=cache[2])
        k4 = self._rhs(n0 + dt * k3[0], c0 + dt * k3[1],
                       B0 + dt * k3[2], options, x0=cache[3])
        for i, k in enumerate((k1, k2, k3, k4)):
            cache[i] = k[1]

        n1 = n0 + (dt / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        c1 = c0 + (dt / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        B1 = B0 + (dt / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        return State(state.t + dt, n1, state.u.with_coeff(c1), B1)

    def fixed_point_solve(self, state: State, dt: float,
                          options: SolverOptions):
        """Implicit-midpoint update solved by Picard iteration:

            v  ->  M^-1[n(v)] (M[n_old] u_old + dt * N[midpoint fields]).

        Density and magnetic field advance alongside the velocity iterate.
        Returns ((n_new, u_new, B_new), record); raises
        FixedPointDivergenceError when fp_max_iters is exhausted (a smaller
        dt restores the contraction).
        """
        g = self.grid
        n0, c0, B0 = state.n, state.u.coeff, state.B
        M0u0 = self.mass_operator_apply(n0, c0)
        n_k, c_k, B_k = n0, c0, B0
        record = FixedPointRecord(iterations=0)
        scale = max(state.u.coeff_norm(), 1.0)

        for it in range(1, options.fp_max_iters + 1):
            n_mid = 0.5 * (n0 + n_k)
            c_mid = 0.5 * (c0 + c_k)
            B_mid = 0.5 * (B0 + B_k)
            u_mid = g.to_real(c_mid)

            n_new = n0 + dt * self.continuity_rhs(n_mid, u_mid)
            B_new = B0 + dt * self.induction_rhs(n_mid, u_mid, B_mid)
            rhs = M0u0 + dt * self.momentum_operator(u_mid, u_mid, n_mid, B_mid)
            c_new = self.mass_operator_solve(
                n_new, rhs, x0=c_k, tol=min(1e-12, options.fp_tol),
                density_floor=options.density_floor,
            )

            diff = _coeff_l2(g, c_new - c_k)
            record.iterations = it
            record.diffs.append(diff)
            n_k, c_k, B_k = n_new, c_new, B_new
            if diff <= options.fp_tol * scale:
                record.converged = True
                break
        else:
            raise FixedPointDivergenceError(
                f"velocity fixed point did not contract to {options.fp_tol:g} "
                f"within {options.fp_max_iters} iterations (last diff "
                f"{record.diffs[-1]:.3e}); reduce dt"
            )
        return (n_k, state.u.with_coeff(c_k), B_k), record

    def step_imex(self, state: State, options: SolverOptions):
        (n1, u1, B1), record = self.fixed_point_solve(state, options.dt, options)
        return State(state.t + options.dt, n1, u1, B1), record

    def step(self, state: State, options: SolverOptions, _cache=None) -> State:
        if options.integrator == "imex":
            new_state, _ = self.step_imex(state, options)
            return new_state
        return self.step_rk4(state, options, _cache=_cache)

    # -- run loop ---------------------------------------------------------------

    def run(self, state: State, options: SolverOptions, *, cadence: int = 1,
            sample_fn=None, store_fields: bool = False,
            checkpoint_writer=None, checkpoint_every: int = 0) -> RunResult:
        """Advance to t_end, sampling diagnostics every `cadence` steps.

        sample_fn(state) -> dict extends the built-in row (time, mass,
        density extrema, div B, velocity norm).  On NaN/Inf the last good
        state is handed to checkpoint_writer (if any) and BlowUpError is
        raised; densities below the solver floor raise PositivityError.
        """
        if cadence < 1:
            raise ValueError("cadence must be >= 1")
        n_steps = max(1, int(round(options.t_end / options.dt)))
        cache = [None] * 4

        times: list[float] = []
        rows: list[dict] = []
        states: list[State] | None = [] if store_fields else None

        def sample(s: State):
            times.append(s.t)
            rows.append(self._base_row(s, sample_fn))
            if states is not None:
                states.append(s.copy())

        sample(state)
        last_good = state
        for step_i in range(1, n_steps + 1):
            try:
                state = self.step(state, options, _cache=cache)
            except BlowUpError as exc:
                ckpt = checkpoint_writer(last_good) if checkpoint_writer else None
                raise BlowUpError(str(exc), t=last_good.t, checkpoint=ckpt) from exc
            if not state.is_finite():
                ckpt = checkpoint_writer(last_good) if checkpoint_writer else None
                raise BlowUpError(
                    f"non-finite field values at t={state.t:.6g}",
                    t=state.t, checkpoint=ckpt,
                )
            if float(state.n.min()) < options.density_floor:
                raise PositivityError(
                    f"density fell below floor {options.density_floor:g} "
                    f"at t={state.t:.6g}"
                )
            last_good = state
            if checkpoint_writer and checkpoint_every and step_i % checkpoint_every == 0:
                checkpoint_writer(state)
            if step_i % cadence == 0 or step_i == n_steps:
                sample(state)
        return RunResult(times=times, rows=rows, states=states,
                         final_state=state)

    def _base_row(self, state: State, sample_fn):
        g = self.grid
        row = {
            "time": state.t,
            "mass": g.integrate(state.n),
            "min_density": float(state.n.min()),
            "max_density": float(state.n.max()),
            "velocity_l2": state.u.coeff_norm(),
            "div_b_l2": g.l2(g.div(state.B)),
        }
        if sample_fn is not None:
            row.update(sample_fn(state))
        return row

    # -- maximum-principle envelope ----------------------------------------------

    def max_principle_envelope(self, n0, times, u_history):
        """Exponential transport bounds for the diffusive continuity equation
        with a frozen velocity history:

            min(n0) exp(-I(t)) <= n(x, t) <= max(n0) exp(+I(t)),

        where I(t) integrates the sup-norm of div u.  u_history is one frozen
        field (2, nx, ny) or a sequence of fields matching `times`.
        """
        g = self.grid
        times = np.asarray(times, dtype=float)
        u_history = np.asarray(u_history, dtype=float)
        if u_history.ndim == 3:
            sup = np.full(times.shape, float(np.abs(g.div(u_history)).max()))
        else:
            if len(u_history) != len(times):
                raise ValueError("u_history length must match times")
            sup = np.array([float(np.abs(g.div(u)).max()) for u in u_history])
        integral = np.concatenate(
            [[0.0], np.cumsum(0.5 * (sup[1:] + sup[:-1]) * np.diff(times))]
        )
        lower = float(n0.min()) * np.exp(-integral)
        upper = float(n0.max()) * np.exp(integral)
        return lower, upper


def _coeff_l2(grid: Grid, coeff) -> float:
    total = np.sum(np.abs(coeff) ** 2)
    return float(np.sqrt((2.0 * np.pi) ** 2 * total) / (grid.nx * grid.ny))


def suggest_dt(system: QMHDSystem, state: State, cfl: float = 0.25) -> float:
    """CFL-style bound from advection, density diffusion, resistivity, and the
    hyper-regularization symbol; advisory only."""
    g = system.grid
    reg = system.reg
    k_d = float(np.hypot(g.dealias_kx, g.dealias_ky))
    u_max = float(np.abs(state.u.values).max())
    nu_max = float(np.max(laws.resistivity(state.n, system.cparams)))
    n_max = float(state.n.max())
    rates = [
        u_max * k_d,
        reg.epsilon * k_d**2,
        nu_max * k_d**2,
        reg.lambda_reg * n_max**2 * k_d ** (4 * reg.s + 2),
    ]
    fastest = max(max(rates), 1e-12)
    return cfl / fastest
