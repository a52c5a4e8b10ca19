"""Scratch: verify the semi-discrete energy and BD identities converge."""
import numpy as np
from qmhd2d import *
from qmhd2d import constitutive as laws

def energy(sys_, st):
    g, p, reg = sys_.grid, sys_.cparams, sys_.reg
    n, uv, B = st.n, st.u.values, st.B
    E = 0.5*g.integrate(n*np.sum(uv**2, axis=0))
    E += g.integrate(laws.enthalpy(n, p) + laws.enthalpy_cold(n, p))
    phi = laws.dispersion(n, p)
    E += 0.25*p.hbar**2 * g.inner(g.grad(phi), g.grad(phi))
    E += 0.5*g.integrate(np.sum(B**2, axis=0))
    if reg.lambda_reg > 0:
        E += 0.5*reg.lambda_reg * g.sobolev_seminorm_sq(n, 2*reg.s+1)
    return E

def dissipation(sys_, st):
    g, p, reg = sys_.grid, sys_.cparams, sys_.reg
    n, uv, B = st.n, st.u.values, st.B
    D = g.sym_grad(uv)
    out = 2.0*g.integrate(laws.shear_viscosity(n,p)*np.sum(D**2, axis=(0,1)))
    out += g.integrate(laws.bulk_viscosity(n,p)*g.div(uv)**2)
    j = g.curl2(B)
    out += g.integrate(laws.resistivity(n,p)*j**2)
    if reg.epsilon > 0:
        gn = g.grad(n)
        out += reg.epsilon*g.integrate((laws.pressure_deriv(n,p)+laws.cold_pressure_deriv(n,p))/n*np.sum(gn**2,axis=0))
        phi = laws.dispersion(n,p)
        out += reg.epsilon*0.5*p.hbar**2*g.integrate(laws.dispersion_deriv(n,p)*g.laplacian(phi)*g.laplacian(n))
    if reg.lambda_reg > 0:
        lam, s = reg.lambda_reg, reg.s
        m = g.dealias(n*uv)
        out += lam*g.weighted_seminorm_sq(m, 4*s+2)
        if reg.epsilon > 0:
            out += lam*reg.epsilon*g.sobolev_seminorm_sq(n, 2*(s+1))  # |Δ^{s+1}n|²: ∫|Δ^{s+1}n|² = weighted power 4(s+1)
    return out

def bd_functional(sys_, st):
    g, p, reg = sys_.grid, sys_.cparams, sys_.reg
    n, uv, B = st.n, st.u.values, st.B
    gphiB = g.grad(laws.bd_drift_potential(n, p))
    w = uv + gphiB
    F = 0.5*g.integrate(n*np.sum(w**2, axis=0))
    F += g.integrate(laws.enthalpy(n, p) + laws.enthalpy_cold(n, p))
    phi = laws.dispersion(n, p)
    F += 0.25*p.hbar**2 * g.inner(g.grad(phi), g.grad(phi))
    F += 0.5*g.integrate(np.sum(B**2, axis=0))
    if reg.lambda_reg > 0:
        F += 0.5*reg.lambda_reg * g.sobolev_seminorm_sq(n, 2*reg.s+1)
    return F

def bd_lines(sys_, st):
    """Returns LHS-sum - RHS-sum (so residual = FD + value)."""
    g, p, reg = sys_.grid, sys_.cparams, sys_.reg
    eps, lam, s = reg.epsilon, reg.lambda_reg, reg.s
    n, uv, B = st.n, st.u.values, st.B
    A = g.antisym_grad(uv)
    mu = laws.shear_viscosity(n, p); mup = laws.shear_viscosity_deriv(n, p)
    phi = laws.dispersion(n, p); phip = laws.dispersion_deriv(n, p)
    lap_phi = g.laplacian(phi)
    gn = g.grad(n)
    j = g.curl2(B)
    lhs = 2.0*g.integrate(mu*np.sum(A**2, axis=(0,1)))
    lhs += p.hbar**2 * p.mu0 * g.integrate(phip*lap_phi**2)
    lhs += g.integrate(laws.resistivity(n,p)*j**2)
    lhs += 2.0*g.integrate(mup*(laws.pressure_deriv(n,p)+laws.cold_pressure_deriv(n,p))*np.sum(gn**2,axis=0)/n)
    rhs = 0.0
    gphiB = g.grad(laws.bd_drift_potential(n, p))
    lor = g.lorentz(B)
    rhs += g.inner(lor, gphiB)
    if eps > 0:
        lapn = g.laplacian(n)
        fac = laws.bd_potential_grad_factor(n, p)  # phi_B'
        divnu = g.div(g.dealias(n*uv))
        lhs += eps*g.integrate((laws.pressure_deriv(n,p)+laws.cold_pressure_deriv(n,p))/n*np.sum(gn**2,axis=0))
        lhs += eps*0.5*p.hbar**2*g.integrate(phip*lap_phi*lapn)
        rhs += -eps*g.integrate(divnu*fac*lapn)
        rhs += eps*0.5*g.integrate(np.sum(gphiB**2,axis=0)*lapn)
        gu = g.grad_tensor(uv)
        rhs += -eps*g.integrate(np.sum(np.einsum("j...,ij...->i...", gn, gu)*gphiB, axis=0))
        rhs += eps*g.integrate(n*np.sum(gphiB*g.grad(fac*lapn), axis=0))
    if lam > 0:
        mun = laws.shear_viscosity(n, p)
        lhs += 2.0*lam*g.integrate(g.hyper(n, s+1)*g.hyper(mun, s+1))
        m = g.dealias(n*uv)
        lhs += lam*g.weighted_seminorm_sq(m, 4*s+2)
        if eps > 0:
            lhs += lam*eps*g.sobolev_seminorm_sq(n, 2*(s+1))
        TA = g.hyper(g.grad_tensor(m), s)  # Δ^s ∇(nu)
        TB = g.hyper(g.grad_tensor(g.grad(mun)), s)  # Δ^s ∇(∇μ)
        rhs += -2.0*lam*g.integrate(np.sum(TA*TB, axis=(0,1)))
    return lhs - rhs

def residuals(sys_, res, F_fn, L_fn):
    t = np.array(res.times)
    F = np.array([F_fn(sys_, s) for s in res.states])
    L = np.array([L_fn(sys_, s) for s in res.states])
    dt = np.diff(t)
    return (F[1:]-F[:-1])/dt + 0.5*(L[1:]+L[:-1])

def make_ic(g, amp=0.08):
    n0 = 1.0 + amp*(np.cos(g.X)*np.cos(g.Y) + 0.5*np.sin(g.Y))
    u0 = amp*np.stack([np.sin(g.X)*np.cos(g.Y), np.cos(2*g.Y)*0.5 - np.sin(g.X)*0.3])
    B0 = g.solenoidal_from_stream(amp*(np.cos(g.X + g.Y) + 0.3*np.sin(2*g.X)))
    return n0, u0, B0

def study(tag, cp, reg, B_on=True, dts=(4e-3, 2e-3, 1e-3), T=0.2, nx=48):
    g = Grid(nx)
    sys_ = QMHDSystem(g, cp, reg)
    n0, u0, B0 = make_ic(g)
    if not B_on:
        B0 = 0.0*B0
    maxr_E, maxr_BD = [], []
    for dt in dts:
        st = sys_.make_state(n0, u0, B0)
        res = sys_.run(st, SolverOptions(dt=dt, t_end=T), cadence=1, store_fields=True)
        rE = residuals(sys_, res, energy, dissipation)
        rB = residuals(sys_, res, bd_functional, bd_lines)
        maxr_E.append(np.abs(rE).max()); maxr_BD.append(np.abs(rB).max())
    oE = [np.log2(a/b) for a, b in zip(maxr_E, maxr_E[1:])]
    oB = [np.log2(a/b) for a, b in zip(maxr_BD, maxr_BD[1:])]
    print(f"{tag}: energy max|r| = {['%.3e'%v for v in maxr_E]} orders {['%.2f'%v for v in oE]}")
    print(f"{tag}: BD     max|r| = {['%.3e'%v for v in maxr_BD]} orders {['%.2f'%v for v in oB]}")

cp = ConstitutiveParams(gamma=2.0, gamma_minus=5.0, c1=0.1, c2=0.1, mu0=0.1, alpha=0.5,
                        hbar=0.05, resistivity=laws.ResistivityProfile().scaled(0.05))
full_ball = 0  # placeholder
g48 = Grid(48)
from qmhd2d.spectral import GalerkinBall
NMAX = GalerkinBall.max_modes(g48)
print("max modes on 48^2:", NMAX)

study("reduced (B=0, eps=0, lam=0)", cp, RegularizationParams(0.0, 0.0, 1, NMAX), B_on=False)
study("magnetized (eps=0, lam=0) ", cp, RegularizationParams(0.0, 0.0, 1, NMAX), B_on=True)
study("eps=1e-3 (lam=0)          ", cp, RegularizationParams(1e-3, 0.0, 1, NMAX), B_on=True)
study("alpha=1 reduced           ",
      ConstitutiveParams(gamma=2.0, c1=0.1, c2=0.1, mu0=0.1, alpha=1.0, hbar=0.05,
                         resistivity=laws.ResistivityProfile().scaled(0.05)),
      RegularizationParams(0.0, 0.0, 1, NMAX), B_on=False)
