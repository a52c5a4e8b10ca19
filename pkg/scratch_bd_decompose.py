"""Scratch: test each spatial identity in the BD derivation discretely."""
import numpy as np
from qmhd2d import *
from qmhd2d import constitutive as laws
from qmhd2d.spectral import GalerkinBall

g = Grid(48)
NMAX = GalerkinBall.max_modes(g)
cp = ConstitutiveParams(gamma=2.0, gamma_minus=5.0, c1=0.1, c2=0.1, mu0=0.1, alpha=0.5,
                        hbar=0.0, resistivity=laws.ResistivityProfile().scaled(0.05))
reg = RegularizationParams(0.0, 0.0, 1, NMAX)
sys_ = QMHDSystem(g, cp, reg)

amp = 0.08
n = 1.0 + amp*(np.cos(g.X)*np.cos(g.Y) + 0.5*np.sin(g.Y))
u0 = amp*np.stack([np.sin(g.X)*np.cos(g.Y), np.cos(2*g.Y)*0.5 - np.sin(g.X)*0.3])
st = sys_.make_state(n, u0, 0.0*np.stack([g.X, g.X]))
n, uv = st.n, st.u.values

mu = laws.shear_viscosity(n, cp); mup = laws.shear_viscosity_deriv(n, cp)
lamv = laws.bulk_viscosity(n, cp)
phiB = laws.bd_drift_potential(n, cp)
gphi = g.grad(phiB)
fac = laws.bd_potential_grad_factor(n, cp)  # phi_B'
divu = g.div(uv)
gu = g.grad_tensor(uv)
D = g.sym_grad(uv); A = g.antisym_grad(uv)
gn = g.grad(n)

# identity A: transport bookkeeping
m_exact = n*uv
divnu = g.div(m_exact)
T = np.einsum("i...,j...->ij...", uv, m_exact)
I1 = g.integrate(divnu**2 * fac)
I2 = -g.inner(gphi, g.div_tensor(T))
rhsA = g.integrate(lamv*divu**2) + 2.0*g.integrate(mu*(np.sum(D**2,axis=(0,1)) - np.sum(A**2,axis=(0,1))))
print("identity A (transport):", I1 + I2 - rhsA)

# identity C: viscous tested with grad phi: <2 div(mu D) + grad(lam divu), gphi>
visc_dual = 2.0*g.div_tensor(mu*D) + g.grad(lamv*divu)
lhsC = g.inner(visc_dual, gphi)
triple = (2.0*g.integrate(np.einsum("ij...,i...,j...->...", gu, g.grad(mu), gphi))
          - 2.0*g.integrate(np.sum(g.grad(mu)*gphi, axis=0)*divu)
          - g.integrate((2.0*mu+lamv)*g.laplacian(phiB)*divu))
print("identity C (viscous triple):", lhsC - triple)

# identity B: triple + (T_a + T_b) = 0 with exact ndot = -div(nu)
ndot = -divnu
Ta = 0.5*g.integrate(ndot*np.sum(gphi**2, axis=0))
# T_b = int n gphi . d_t gphi,  d_t gphi = grad(fac * ndot)
Tb = g.integrate(n*np.sum(gphi*g.grad(fac*ndot), axis=0))
print("identity B (drift transport + viscous):", triple + Ta + Tb)

# pressure pairing: -<grad(P+Pc), gphi> vs -2 mu'(P'+Pc')|gn|^2/n
pres = laws.pressure(n, cp) + laws.cold_pressure(n, cp)
lhsP = -g.inner(g.grad(pres), gphi)
lineP = -2.0*g.integrate(mup*(laws.pressure_deriv(n, cp)+laws.cold_pressure_deriv(n, cp))*np.sum(gn**2,axis=0)/n)
print("identity P (pressure-drift):", lhsP - lineP)

# now the SCHEME versions (dealias placements as assembled):
opts = SolverOptions(dt=1e-3, t_end=1.0)
ndot_s, udot, Bdot = sys_._rhs(st.n, st.u.coeff, st.B, opts)
u_dotv = g.to_real(udot)
# d/dt int n u . gphi  (chain rule, semi-discrete)
d_drift = (g.integrate(ndot_s*np.sum(uv*gphi, axis=0))
           + g.integrate(n*np.sum(u_dotv*gphi, axis=0))
           + g.integrate(n*np.sum(uv*g.grad(fac*ndot_s), axis=0)))
# identity-based prediction: <N_dual, gphi> + int (div nu)^2 fac   [with scheme ndot]
Nd = sys_.momentum_operator(uv, uv, n, st.B)
Nf = g.to_real(Nd)
pred = g.inner(Nf, gphi) + g.integrate(n*np.sum(uv*g.grad(fac*ndot_s), axis=0))
print("drift evolution vs <N,gphi> route:", d_drift - pred)

# <N,gphi> vs sum of exact-calculus pieces
pieces = (-g.inner(gphi, g.div_tensor(T))    # convection
          + lhsP                              # pressure
          + lhsC)                             # viscous
print("<N,gphi> vs exact pieces:", g.inner(Nf, gphi) - pieces)
