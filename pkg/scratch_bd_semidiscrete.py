"""Scratch: semi-discrete BD residual — isolates which line mismatches."""
import numpy as np
from qmhd2d import *
from qmhd2d import constitutive as laws
from scratch_identity_check import bd_functional, bd_lines, make_ic

def semi_residual(sys_, st, opts):
    """d/dt F_BD along the exact semi-discrete flow (4th-order FD in a
    fictitious time) plus the line sum."""
    ndot, udot, Bdot = sys_._rhs(st.n, st.u.coeff, st.B, opts)
    def F(h):
        s2 = State(st.t, st.n + h*ndot, st.u.with_coeff(st.u.coeff + h*udot), st.B + h*Bdot)
        return bd_functional(sys_, s2)
    h = 1e-4
    dF = (-F(2*h) + 8*F(h) - 8*F(-h) + F(-2*h)) / (12*h)
    return dF + bd_lines(sys_, st)

from qmhd2d.spectral import GalerkinBall
g = Grid(48)
NMAX = GalerkinBall.max_modes(g)
opts = SolverOptions(dt=1e-3, t_end=1.0)

def case(tag, cp, reg, B_on=True, amp=0.08):
    sys_ = QMHDSystem(g, cp, reg)
    n0, u0, B0 = make_ic(g, amp)
    if not B_on:
        B0 = 0.0 * B0
    st = sys_.make_state(n0, u0, B0)
    r = semi_residual(sys_, st, opts)
    print(f"{tag}: semi-discrete BD residual = {r:.3e}")
    return r

base = dict(gamma=2.0, gamma_minus=5.0, c1=0.1, c2=0.1,
            resistivity=laws.ResistivityProfile().scaled(0.05))
reg0 = RegularizationParams(0.0, 0.0, 1, NMAX)

# everything off except viscosity+convection (classical BD, no pressure work possible: keep pressure on)
case("full alpha=1/2          ", ConstitutiveParams(mu0=0.1, alpha=0.5, hbar=0.05, **base), reg0, B_on=False)
case("no quantum (hbar=0)     ", ConstitutiveParams(mu0=0.1, alpha=0.5, hbar=0.0, **base), reg0, B_on=False)
case("alpha=1, no quantum     ", ConstitutiveParams(mu0=0.1, alpha=1.0, hbar=0.0, **base), reg0, B_on=False)
case("quantum only (mu tiny)  ", ConstitutiveParams(mu0=1e-8, alpha=0.5, hbar=0.05, **base), reg0, B_on=False)
case("amp/2, no quantum       ", ConstitutiveParams(mu0=0.1, alpha=0.5, hbar=0.0, **base), reg0, B_on=False, amp=0.04)
case("amp/4, no quantum       ", ConstitutiveParams(mu0=0.1, alpha=0.5, hbar=0.0, **base), reg0, B_on=False, amp=0.02)
