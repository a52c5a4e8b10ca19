"""Audits of the energy and Bresch-Desjardins entropy structure.

Every audit is a pure function of stored states: it recomputes functional
values and dissipation/production lines by collocation quadrature and
compares finite differences in time against the signed line sums.  Residuals
are reported signed and never asserted to have a sign; on smooth,
well-resolved runs they decay at the time-discretization order.

Two normalization choices keep the audited identities exact for the scheme
as implemented (the quantum force is (hbar^2/2) n grad(phi' Lap(phi))):
the quantum energy carries (hbar^2/4) |grad phi(n)|^2, and the BD quantum
production line carries hbar^2 mu0 phi'(n) |Lap phi(n)|^2.  The viscous
dissipation uses the symmetric-gradient form 2 mu(n) |D(u)|^2 that the
momentum operator actually produces.

Note: the piecewise cold-pressure law has a curvature jump at n = 1, so
pseudo-spectral runs whose density crosses 1 carry a small resolution-limited
audit floor; refinement studies should keep the density window on one branch.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields

import numpy as np

from . import constitutive as laws
from .approximation import QMHDSystem, RunResult, State

__all__ = [
    "EnergyBudget",
    "BDBudget",
    "WeakResidualReport",
    "DiagnosticsSeries",
    "total_energy",
    "bd_entropy",
    "energy_residuals",
    "bd_residuals",
    "check_energy_inequality",
    "bd_identity_residual",
    "lorentz_drift_split",
    "apriori_norms",
    "apriori_bounds_report",
    "TestFunctionBattery",
    "weak_residuals",
    "limit_case_check",
    "decay_orders",
    "make_sample_fn",
]


# ---------------------------------------------------------------------------
# budgets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyBudget:
    """Energy functional decomposition plus the instantaneous dissipation
    lines balancing d/dt E.  All lines are signed values; kinetic, internal,
    cold, quantum, magnetic and hyper are >= 0, the bulk-viscosity and
    eps-quantum lines may be negative."""

    kinetic: float
    internal: float
    cold: float
    quantum: float
    magnetic: float
    hyper: float
    total: float
    viscous_shear: float      # 2 int mu(n) |D(u)|^2
    viscous_bulk: float       # int lambda_visc(n) (div u)^2, signed
    eps_pressure: float       # eps int (P' + Pc')/n |grad n|^2
    resistive: float          # int nu_b(n) |curl B|^2
    hyper_momentum: float     # lambda int |Lap^s grad(n u)|^2
    hyper_eps: float          # lambda eps int |Lap^(s+1) n|^2
    eps_quantum: float        # eps (hbar^2/2) int phi' Lap(phi) Lap(n), signed

    @property
    def dissipation(self) -> float:
        return (self.viscous_shear + self.viscous_bulk + self.eps_pressure
                + self.resistive + self.hyper_momentum + self.hyper_eps
                + self.eps_quantum)


@dataclass(frozen=True)
class BDBudget:
    """BD entropy functional and the signed lines of its balance law.

    `production` lines sit on the dissipation side, `source` lines on the
    right-hand side; the audit residual is
    d/dt functional + sum(production) - sum(source).
    """

    drift_kinetic: float      # 1/2 int n |u + grad phi_BD|^2
    internal: float
    cold: float
    quantum: float
    magnetic: float
    hyper: float
    functional: float
    visc_antisym: float       # 2 int mu(n) |A(u)|^2
    quantum_production: float  # hbar^2 mu0 int phi' |Lap phi|^2
    resistive: float
    pressure_drift: float     # 2 int mu' (P' + Pc') |grad n|^2 / n
    hyper_cross: float        # 2 lambda int Lap^(s+1) n Lap^(s+1) mu(n)
    hyper_momentum: float
    hyper_eps: float
    eps_pressure: float
    eps_quantum: float
    hyper_gradmu: float       # -2 lambda int Lap^s grad(nu) : Lap^s Hess(mu)
    eps_mass_flux_drift: float   # -eps int div(nu) phi_BD' Lap(n)
    eps_drift_energy: float      # +eps int |grad phi_BD|^2 / 2 Lap(n)
    eps_velocity_grad: float     # -eps int (grad n . grad) u . grad phi_BD
    eps_drift_transport: float   # +eps int n grad phi_BD . grad(phi_BD' Lap n)
    lorentz_drift: float         # +int (curl B) x B . grad phi_BD
    hyper_cross_alt: float       # 2 lambda int Lap^(s+1) n Lap^s mu(n), reported only

    @property
    def production_sum(self) -> float:
        return (self.visc_antisym + self.quantum_production + self.resistive
                + self.pressure_drift + self.hyper_cross + self.hyper_momentum
                + self.hyper_eps + self.eps_pressure + self.eps_quantum)

    @property
    def source_sum(self) -> float:
        return (self.hyper_gradmu + self.eps_mass_flux_drift
                + self.eps_drift_energy + self.eps_velocity_grad
                + self.eps_drift_transport + self.lorentz_drift)

    @property
    def net_lines(self) -> float:
        return self.production_sum - self.source_sum


def _common_fields(system: QMHDSystem, state: State):
    g, p = system.grid, system.cparams
    n, uv, B = state.n, state.u.values, state.B
    return g, p, n, uv, B


def total_energy(system: QMHDSystem, state: State) -> EnergyBudget:
    """Quadrature of every energy line on the current state."""
    g, p, n, uv, B = _common_fields(system, state)
    reg = system.reg
    if float(n.min()) <= 0.0:
        raise laws.PositivityError("energy budget requires positive density")

    kinetic = 0.5 * g.integrate(n * np.sum(uv**2, axis=0))
    internal = g.integrate(laws.enthalpy(n, p))
    cold = g.integrate(laws.enthalpy_cold(n, p))
    phi = laws.dispersion(n, p)
    gphi = g.grad(phi)
    quantum = 0.25 * p.hbar**2 * g.inner(gphi, gphi)
    magnetic = 0.5 * g.integrate(np.sum(B**2, axis=0))
    hyper = 0.0
    if reg.lambda_reg > 0:
        hyper = 0.5 * reg.lambda_reg * g.sobolev_seminorm_sq(n, 2 * reg.s + 1)
    total = kinetic + internal + cold + quantum + magnetic + hyper

    D = g.sym_grad(uv)
    viscous_shear = 2.0 * g.integrate(
        laws.shear_viscosity(n, p) * np.sum(D**2, axis=(0, 1)))
    viscous_bulk = g.integrate(laws.bulk_viscosity(n, p) * g.div(uv) ** 2)
    j = g.curl2(B)
    resistive = g.integrate(laws.resistivity(n, p) * j**2)

    eps_pressure = 0.0
    eps_quantum = 0.0
    if reg.epsilon > 0:
        gn = g.grad(n)
        ptot = laws.pressure_deriv(n, p) + laws.cold_pressure_deriv(n, p)
        eps_pressure = reg.epsilon * g.integrate(ptot / n * np.sum(gn**2, axis=0))
        eps_quantum = (reg.epsilon * 0.5 * p.hbar**2 * g.integrate(
            laws.dispersion_deriv(n, p) * g.laplacian(phi) * g.laplacian(n)))

    hyper_momentum = 0.0
    hyper_eps = 0.0
    if reg.lambda_reg > 0:
        m = g.dealias(n * uv)
        hyper_momentum = reg.lambda_reg * g.weighted_seminorm_sq(m, 4 * reg.s + 2)
        if reg.epsilon > 0:
            hyper_eps = (reg.lambda_reg * reg.epsilon
                         * g.sobolev_seminorm_sq(n, 2 * (reg.s + 1)))

    return EnergyBudget(
        kinetic=kinetic, internal=internal, cold=cold, quantum=quantum,
        magnetic=magnetic, hyper=hyper, total=total,
        viscous_shear=viscous_shear, viscous_bulk=viscous_bulk,
        eps_pressure=eps_pressure, resistive=resistive,
        hyper_momentum=hyper_momentum, hyper_eps=hyper_eps,
        eps_quantum=eps_quantum,
    )


def bd_entropy(system: QMHDSystem, state: State) -> BDBudget:
    """Quadrature of the BD functional and every line of its balance law."""
    g, p, n, uv, B = _common_fields(system, state)
    reg = system.reg
    eps, lam, s = reg.epsilon, reg.lambda_reg, reg.s
    if float(n.min()) <= 0.0:
        raise laws.PositivityError("BD budget requires positive density")

    gphiB = g.grad(laws.bd_drift_potential(n, p))
    w = uv + gphiB
    drift_kinetic = 0.5 * g.integrate(n * np.sum(w**2, axis=0))
    internal = g.integrate(laws.enthalpy(n, p))
    cold = g.integrate(laws.enthalpy_cold(n, p))
    phi = laws.dispersion(n, p)
    gphi = g.grad(phi)
    quantum = 0.25 * p.hbar**2 * g.inner(gphi, gphi)
    magnetic = 0.5 * g.integrate(np.sum(B**2, axis=0))
    hyper = 0.0
    if lam > 0:
        hyper = 0.5 * lam * g.sobolev_seminorm_sq(n, 2 * s + 1)
    functional = drift_kinetic + internal + cold + quantum + magnetic + hyper

    A = g.antisym_grad(uv)
    mu = laws.shear_viscosity(n, p)
    mup = laws.shear_viscosity_deriv(n, p)
    phip = laws.dispersion_deriv(n, p)
    lap_phi = g.laplacian(phi)
    gn = g.grad(n)
    j = g.curl2(B)
    ptot = laws.pressure_deriv(n, p) + laws.cold_pressure_deriv(n, p)

    visc_antisym = 2.0 * g.integrate(mu * np.sum(A**2, axis=(0, 1)))
    quantum_production = p.hbar**2 * p.mu0 * g.integrate(phip * lap_phi**2)
    resistive = g.integrate(laws.resistivity(n, p) * j**2)
    pressure_drift = 2.0 * g.integrate(mup * ptot * np.sum(gn**2, axis=0) / n)
    lorentz_drift = g.inner(g.lorentz(B), gphiB)

    eps_pressure = eps_quantum = 0.0
    eps_mass_flux_drift = eps_drift_energy = 0.0
    eps_velocity_grad = eps_drift_transport = 0.0
    if eps > 0:
        lapn = g.laplacian(n)
        fac = laws.bd_potential_grad_factor(n, p)
        divnu = g.div(g.dealias(n * uv))
        eps_pressure = eps * g.integrate(ptot / n * np.sum(gn**2, axis=0))
        eps_quantum = eps * 0.5 * p.hbar**2 * g.integrate(phip * lap_phi * lapn)
        eps_mass_flux_drift = -eps * g.integrate(divnu * fac * lapn)
        eps_drift_energy = eps * 0.5 * g.integrate(np.sum(gphiB**2, axis=0) * lapn)
        gu = g.grad_tensor(uv)
        eps_velocity_grad = -eps * g.integrate(
            np.sum(np.einsum("j...,ij...->i...", gn, gu) * gphiB, axis=0))
        eps_drift_transport = eps * g.integrate(
            n * np.sum(gphiB * g.grad(fac * lapn), axis=0))

    hyper_cross = hyper_momentum = hyper_eps = 0.0
    hyper_gradmu = hyper_cross_alt = 0.0
    if lam > 0:
        hyper_cross = 2.0 * lam * g.integrate(g.hyper(n, s + 1) * g.hyper(mu, s + 1))
        hyper_cross_alt = (2.0 * lam * g.integrate(g.hyper(n, s + 1) * g.hyper(mu, s))
                           if s >= 1 else 0.0)
        m = g.dealias(n * uv)
        hyper_momentum = lam * g.weighted_seminorm_sq(m, 4 * s + 2)
        if eps > 0:
            hyper_eps = lam * eps * g.sobolev_seminorm_sq(n, 2 * (s + 1))
        TA = g.hyper(g.grad_tensor(m), s)
        TB = g.hyper(g.grad_tensor(g.grad(mu)), s)
        hyper_gradmu = -2.0 * lam * g.integrate(np.sum(TA * TB, axis=(0, 1)))

    return BDBudget(
        drift_kinetic=drift_kinetic, internal=internal, cold=cold,
        quantum=quantum, magnetic=magnetic, hyper=hyper, functional=functional,
        visc_antisym=visc_antisym, quantum_production=quantum_production,
        resistive=resistive, pressure_drift=pressure_drift,
        hyper_cross=hyper_cross, hyper_momentum=hyper_momentum,
        hyper_eps=hyper_eps, eps_pressure=eps_pressure,
        eps_quantum=eps_quantum, hyper_gradmu=hyper_gradmu,
        eps_mass_flux_drift=eps_mass_flux_drift,
        eps_drift_energy=eps_drift_energy,
        eps_velocity_grad=eps_velocity_grad,
        eps_drift_transport=eps_drift_transport,
        lorentz_drift=lorentz_drift, hyper_cross_alt=hyper_cross_alt,
    )


# ---------------------------------------------------------------------------
# identity residuals
# ---------------------------------------------------------------------------

def _stored_states(result: RunResult) -> list[State]:
    if result.states is None:
        raise ValueError("run was not stored with store_fields=True")
    return result.states


def energy_residuals(system: QMHDSystem, result: RunResult) -> np.ndarray:
    """r_i = [E(t_{i+1}) - E(t_i)]/dt + dissipation at the interval midpoint
    (trapezoidal average of the endpoint lines)."""
    states = _stored_states(result)
    t = np.asarray(result.times)
    budgets = [total_energy(system, st) for st in states]
    E = np.array([b.total for b in budgets])
    D = np.array([b.dissipation for b in budgets])
    dt = np.diff(t)
    return (E[1:] - E[:-1]) / dt + 0.5 * (D[1:] + D[:-1])


def bd_residuals(system: QMHDSystem, result: RunResult) -> np.ndarray:
    """Finite-difference d/dt of the BD functional plus the signed line sum."""
    states = _stored_states(result)
    t = np.asarray(result.times)
    budgets = [bd_entropy(system, st) for st in states]
    F = np.array([b.functional for b in budgets])
    L = np.array([b.net_lines for b in budgets])
    dt = np.diff(t)
    return (F[1:] - F[:-1]) / dt + 0.5 * (L[1:] + L[:-1])


def decay_orders(values) -> list[float]:
    """Observed orders log2(v_i / v_{i+1}) across a halving sequence."""
    return [float(np.log2(a / b)) for a, b in zip(values, values[1:]) if b > 0]


def check_energy_inequality(system: QMHDSystem, results, growth_tol=1e-8) -> dict:
    """Energy-identity report over one or more stored runs (finer dt last).

    Reports max |residual| per run, the observed decay orders between
    consecutive runs, and the largest positive energy jump per unit time
    (non-physical growth) against `growth_tol`.
    """
    if isinstance(results, RunResult):
        results = [results]
    max_res = []
    growth = []
    for res in results:
        r = energy_residuals(system, res)
        max_res.append(float(np.max(np.abs(r))) if r.size else 0.0)
        E = np.array([total_energy(system, st).total for st in _stored_states(res)])
        jumps = np.diff(E) / np.diff(np.asarray(res.times))
        growth.append(float(max(0.0, jumps.max())) if jumps.size else 0.0)
    report = {
        "max_abs_residual": max_res,
        "decay_orders": decay_orders(max_res),
        "max_energy_growth_rate": max(growth),
        "growth_flag": max(growth) > growth_tol,
    }
    return report


def bd_identity_residual(system: QMHDSystem, results) -> dict:
    """BD-identity report over one or more stored runs (finer dt last)."""
    if isinstance(results, RunResult):
        results = [results]
    max_res = []
    for res in results:
        r = bd_residuals(system, res)
        max_res.append(float(np.max(np.abs(r))) if r.size else 0.0)
    return {
        "max_abs_residual": max_res,
        "decay_orders": decay_orders(max_res),
    }


def lorentz_drift_split(system: QMHDSystem, state: State, young_eps=1.0 / 6.0) -> dict:
    """Young-inequality control of the Lorentz-drift coupling:

        |2 int (curl B) x B . grad(mu)/n| <= int |curl B|^2/(eps n^2)
                                             + eps int |grad mu x B|^2.
    """
    g, p, n, _, B = _common_fields(system, state)
    j = g.curl2(B)
    gmu = g.grad(laws.shear_viscosity(n, p))
    lhs = abs(2.0 * g.integrate(j * (-B[1] * gmu[0] + B[0] * gmu[1]) / n))
    cross = gmu[0] * B[1] - gmu[1] * B[0]
    rhs = (g.integrate(j**2 / (young_eps * n**2))
           + young_eps * g.integrate(cross**2))
    return {"lhs": lhs, "rhs": rhs, "young_eps": young_eps, "holds": lhs <= rhs}


# ---------------------------------------------------------------------------
# a-priori norms
# ---------------------------------------------------------------------------

def apriori_norms(system: QMHDSystem, state: State) -> dict:
    """The uniform-bound norms tracked for regression."""
    g, p, n, uv, _ = _common_fields(system, state)
    reg = system.reg
    mu = laws.shear_viscosity(n, p)
    D = g.sym_grad(uv)
    out = {
        "density_gamma_norm": g.lp_norm(n, p.gamma),
        "grad_dispersion_l2": g.l2(g.grad(laws.dispersion(n, p))),
        "sqrt_n_u_l2": float(np.sqrt(g.integrate(n * np.sum(uv**2, axis=0)))),
        "sqrt_mu_Du_l2": float(np.sqrt(g.integrate(mu * np.sum(D**2, axis=(0, 1))))),
        "lap_mu_l2": g.l2(g.laplacian(mu)),
        "grad_inv_sqrt_n_l2": g.l2(g.grad(1.0 / np.sqrt(n))),
        "min_density": float(n.min()),
    }
    gn = g.grad(n)
    out["eps_cold_dissipation_l2"] = float(
        np.sqrt(reg.epsilon * g.integrate(
            laws.cold_pressure_deriv(n, p) / n * np.sum(gn**2, axis=0))))
    if reg.lambda_reg > 0:
        m = g.dealias(n * uv)
        out["hyper_density_l2"] = float(np.sqrt(
            reg.lambda_reg * g.sobolev_seminorm_sq(n, 2 * (reg.s + 1))))
        out["hyper_momentum_l2"] = float(np.sqrt(
            reg.lambda_reg * g.weighted_seminorm_sq(m, 4 * reg.s + 2)))
    return out


def apriori_bounds_report(system: QMHDSystem, result: RunResult) -> dict:
    """Sup over time of each tracked norm, plus a finiteness flag."""
    states = _stored_states(result)
    sups: dict[str, float] = {}
    for st in states:
        for key, val in apriori_norms(system, st).items():
            agg = min if key == "min_density" else max
            sups[key] = agg(sups.get(key, val), val)
    sups["all_finite"] = all(np.isfinite(v) for v in sups.values())
    return sups


# ---------------------------------------------------------------------------
# weak-form residuals
# ---------------------------------------------------------------------------

def _bump(tau):
    """Quintic taper: value 1 / slope 0 at tau=0; value, slope and curvature
    all vanish at tau=1, giving clean second-order trapezoid error."""
    return (1.0 - tau) ** 3 * (1.0 + 3.0 * tau + 6.0 * tau**2)


def _bump_deriv(tau):
    return (-3.0 * (1.0 - tau) ** 2 * (1.0 + 3.0 * tau + 6.0 * tau**2)
            + (1.0 - tau) ** 3 * (3.0 + 12.0 * tau))


class TestFunctionBattery:
    """Randomized separable space-time test functions phi = X(x) T(t).

    X is a zero-mean trigonometric polynomial on modes |k| <= k_max (so the
    battery lies inside any reasonable Galerkin ball); T is a smooth taper
    vanishing with two derivatives at the final time.  Scalar, vector and
    divergence-free variants share the seed, which is recorded in reports.
    """

    def __init__(self, grid, seed: int, n_funcs: int = 20, k_max: int = 3,
                 t_end: float = 1.0):
        self.grid = grid
        self.seed = int(seed)
        self.n_funcs = n_funcs
        self.k_max = k_max
        self.t_end = float(t_end)
        rng = np.random.default_rng(self.seed)
        self.scalars = [self._random_scalar(rng) for _ in range(n_funcs)]
        self.vectors = [np.stack([self._random_scalar(rng),
                                  self._random_scalar(rng)])
                        for _ in range(n_funcs)]
        self.solenoidal = [grid.solenoidal_from_stream(self._random_scalar(rng))
                           for _ in range(n_funcs)]

    def _random_scalar(self, rng):
        g = self.grid
        spec = np.zeros((g.nx, g.ny), dtype=complex)
        for kx in range(-self.k_max, self.k_max + 1):
            for ky in range(-self.k_max, self.k_max + 1):
                if kx == 0 and ky == 0:
                    continue
                if (kx, ky) > (-kx, -ky):
                    continue  # fill one representative per conjugate pair
                c = rng.normal() + 1j * rng.normal()
                spec[kx % g.nx, ky % g.ny] = c
                spec[(-kx) % g.nx, (-ky) % g.ny] = np.conj(c)
        f = g.to_real(spec)
        return f / max(np.abs(f).max(), 1e-30)

    def taper(self, t):
        return _bump(np.asarray(t) / self.t_end)

    def taper_deriv(self, t):
        return _bump_deriv(np.asarray(t) / self.t_end) / self.t_end


def _trap(times, values):
    return float(np.trapezoid(values, times))


@dataclass
class WeakResidualReport:
    seed: int
    n_frames: int
    continuity_max: float
    continuity_rms: float
    momentum_max: float
    momentum_rms: float
    induction_max: float
    induction_rms: float
    resistive_form_gap: float
    momentum_regularization_magnitude: float
    cadence_warning: bool

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}


def continuity_weak_residuals(system, result, battery) -> np.ndarray:
    g = system.grid
    states = _stored_states(result)
    t = np.asarray(result.times)
    out = []
    for X in battery.scalars:
        gX = g.grad(X)
        I1 = np.array([g.integrate(st.n * X) for st in states])
        I2 = np.array([g.inner(st.n * st.u.values, gX) for st in states])
        r = (_trap(t, I1 * battery.taper_deriv(t) + I2 * battery.taper(t))
             + I1[0] * float(battery.taper(t[0])))
        out.append(r)
    return np.array(out)


def momentum_weak_residuals(system, result, battery):
    """Residuals of the distributional momentum identity (the unregularized
    form).  Returns (residuals, regularization_magnitudes): on runs with
    eps/lambda_reg > 0 the extra regularization terms are reported separately
    rather than folded into the residual."""
    g, p = system.grid, system.cparams
    reg = system.reg
    states = _stored_states(result)
    t = np.asarray(result.times)
    T = battery.taper(t)
    Tp = battery.taper_deriv(t)
    res, extras = [], []
    for Xv in battery.vectors:
        gX = g.grad_tensor(Xv)
        divX = g.div(Xv)
        a = np.empty(len(states))
        bal = np.empty(len(states))
        extra = np.empty(len(states))
        for i, st in enumerate(states):
            n, uv, B = st.n, st.u.values, st.B
            m = n * uv
            a[i] = g.inner(m, Xv)
            conv = g.inner(np.einsum("i...,j...->ij...", uv, m), gX)
            pres = g.integrate((laws.pressure(n, p) + laws.cold_pressure(n, p)) * divX)
            D = g.sym_grad(uv)
            visc = 2.0 * g.inner(laws.shear_viscosity(n, p) * D, gX)
            bulk = g.integrate(laws.bulk_viscosity(n, p) * g.div(uv) * divX)
            quant = 0.0
            if p.hbar > 0:
                gq = laws.dispersion_deriv(n, p) * g.laplacian(laws.dispersion(n, p))
                quant = 0.5 * p.hbar**2 * (
                    g.inner(gq * g.grad(n), Xv) + g.integrate(n * gq * divX))
            lor = g.inner(g.lorentz(B), Xv)
            bal[i] = conv + pres - (visc + bulk + quant - lor)
            extra[i] = 0.0
            if reg.lambda_reg > 0:
                lam, s = reg.lambda_reg, reg.s
                mN = g.dealias(n * uv)
                extra[i] += lam * g.inner(n * g.hyper(mN, 2 * s + 1), Xv)
                extra[i] += lam * g.inner(n * g.grad(g.hyper(n, 2 * s + 1)), Xv)
            if reg.epsilon > 0:
                gn = g.grad(n)
                gu = g.grad_tensor(uv)
                extra[i] -= reg.epsilon * g.inner(
                    np.einsum("j...,ij...->i...", gn, gu), Xv)
        r = _trap(t, a * Tp + bal * T) + a[0] * float(T[0])
        res.append(r)
        extras.append(_trap(t, np.abs(extra) * np.abs(T)))
    return np.array(res), np.array(extras)


def induction_weak_residuals(system, result, battery):
    """Residuals of the induction identity with the curl-form resistive term,
    plus the gap to the grad-form nu_b grad B : grad phi variant (the two
    agree for constant nu_b and solenoidal test functions)."""
    g, p = system.grid, system.cparams
    states = _stored_states(result)
    t = np.asarray(result.times)
    T = battery.taper(t)
    Tp = battery.taper_deriv(t)
    res, gaps = [], []
    for W in battery.solenoidal:
        omega_W = g.curl2(W)
        gW = g.grad_tensor(W)
        IB = np.empty(len(states))
        Ie = np.empty(len(states))
        Inu = np.empty(len(states))
        Inu_alt = np.empty(len(states))
        for i, st in enumerate(states):
            n, uv, B = st.n, st.u.values, st.B
            IB[i] = g.inner(B, W)
            Ie[i] = g.integrate(g.emf(uv, B) * omega_W)
            nu = laws.resistivity(n, p)
            j = g.curl2(B)
            Inu[i] = g.integrate(nu * j * omega_W)
            Inu_alt[i] = g.inner(nu * g.grad_tensor(B), gW)
        r = _trap(t, IB * Tp + (Ie - Inu) * T) + IB[0] * float(T[0])
        res.append(r)
        gaps.append(abs(_trap(t, (Inu - Inu_alt) * T)))
    return np.array(res), np.array(gaps)


def weak_residuals(system, result, seed: int, n_funcs: int = 20) -> WeakResidualReport:
    """Evaluate all three weak forms against a seeded random battery."""
    t = np.asarray(result.times)
    battery = TestFunctionBattery(system.grid, seed, n_funcs=n_funcs,
                                  t_end=float(t[-1]))
    rc = continuity_weak_residuals(system, result, battery)
    rm, extras = momentum_weak_residuals(system, result, battery)
    ri, gaps = induction_weak_residuals(system, result, battery)

    def mx(v):
        return float(np.max(np.abs(v)))

    def rms(v):
        return float(np.sqrt(np.mean(v**2)))

    return WeakResidualReport(
        seed=seed, n_frames=len(t),
        continuity_max=mx(rc), continuity_rms=rms(rc),
        momentum_max=mx(rm), momentum_rms=rms(rm),
        induction_max=mx(ri), induction_rms=rms(ri),
        resistive_form_gap=float(np.max(gaps)),
        momentum_regularization_magnitude=float(np.max(extras)),
        cadence_warning=len(t) < 9,
    )


# ---------------------------------------------------------------------------
# limit-case reductions of the quantum term
# ---------------------------------------------------------------------------

def limit_case_check(grid, n, params: laws.ConstitutiveParams) -> dict:
    """Compare the generic quantum stress against its closed reductions.

    alpha = 1: the stress equals (hbar^2/2) n grad(Lap n).
    alpha = 1/2: phi' Lap(phi) equals Lap(sqrt n)/(2 sqrt n); the literal
    stress is then half of (hbar^2/2) n grad(Lap sqrt(n)/sqrt(n)), and both
    normalizations are reported.
    """
    g = grid
    hbar = params.hbar if params.hbar > 0 else 1.0
    report: dict[str, float] = {}

    def quantum_term(p):
        gq = laws.dispersion_deriv(n, p) * g.laplacian(laws.dispersion(n, p))
        return 0.5 * hbar**2 * (-gq * g.grad(n) + g.grad(n * gq))

    p1 = laws.ConstitutiveParams(
        gamma=params.gamma, gamma_minus=params.gamma_minus, c1=params.c1,
        c2=params.c2, mu0=params.mu0, alpha=1.0, hbar=hbar,
        resistivity=params.resistivity)
    q1 = quantum_term(p1)
    direct1 = 0.5 * hbar**2 * n * g.grad(g.laplacian(n))
    scale1 = max(g.l2(direct1), 1e-30)
    report["alpha1_rel_error"] = g.l2(q1 - direct1) / scale1

    ph = laws.ConstitutiveParams(
        gamma=params.gamma, gamma_minus=params.gamma_minus, c1=params.c1,
        c2=params.c2, mu0=params.mu0, alpha=0.5, hbar=hbar,
        resistivity=params.resistivity)
    sqn = np.sqrt(n)
    lhs = laws.dispersion_deriv(n, ph) * g.laplacian(laws.dispersion(n, ph))
    rhs = g.laplacian(sqn) / (2.0 * sqn)
    report["alpha_half_identity_rel_error"] = (
        g.l2(lhs - rhs) / max(g.l2(rhs), 1e-30))

    qh = quantum_term(ph)
    bohm = n * g.grad(g.laplacian(sqn) / sqn)
    report["alpha_half_literal_l2"] = g.l2(qh)
    report["alpha_half_bohm_full_l2"] = g.l2(0.5 * hbar**2 * bohm)
    report["alpha_half_bohm_half_l2"] = g.l2(0.25 * hbar**2 * bohm)
    report["alpha_half_half_norm_rel_error"] = (
        g.l2(qh - 0.25 * hbar**2 * bohm) / max(g.l2(qh), 1e-30))
    report["alpha_half_full_norm_rel_error"] = (
        g.l2(qh - 0.5 * hbar**2 * bohm) / max(g.l2(qh), 1e-30))
    return report


# ---------------------------------------------------------------------------
# time-series container
# ---------------------------------------------------------------------------

def make_sample_fn(system: QMHDSystem, include_bd: bool = True):
    """Row factory for QMHDSystem.run: flattens the energy (and optionally
    BD) budgets plus the a-priori norms into prefixed scalar columns."""

    def sample(state: State) -> dict:
        row: dict[str, float] = {}
        eb = total_energy(system, state)
        for f in dc_fields(eb):
            row[f"e_{f.name}"] = getattr(eb, f.name)
        row["e_dissipation"] = eb.dissipation
        if include_bd:
            bb = bd_entropy(system, state)
            for f in dc_fields(bb):
                row[f"bd_{f.name}"] = getattr(bb, f.name)
            row["bd_net_lines"] = bb.net_lines
        for key, val in apriori_norms(system, state).items():
            row[f"norm_{key}"] = val
        return row

    return sample


class DiagnosticsSeries:
    """Ordered time series of diagnostic rows with a documented CSV form."""

    def __init__(self, rows: list[dict]):
        if not rows:
            raise ValueError("diagnostics series needs at least one row")
        self.columns = list(rows[0].keys())
        self.rows = rows

    def column(self, name) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.column("time")

    def write_csv(self, path):
        lines = ["# qmhd2d diagnostics series",
                 "# one row per sample; columns:"]
        for c in self.columns:
            lines.append(f"#   {c}")
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join("%.17g" % float(row[c]) for c in self.columns))
        text = "\n".join(lines) + "\n"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        return path
