"""Constitutive laws: pressure, cold pressure, viscosities, dispersion, resistivity.

The fluid closes with a power-law pressure P(n) = n^gamma, a singular cold
pressure that penalizes near-vacuum densities, shear viscosity
mu(n) = mu0 n^alpha with the Bresch-Desjardins bulk-viscosity relation
lambda_visc(n) = 2 (n mu'(n) - mu(n)), a Bohm-type dispersion function
phi(n) = n^alpha, and a density-dependent magnetic resistivity confined to a
two-sided power-law corridor.

Enthalpy-type potentials are normalized so that every functional built from
them is finite and comparable across runs: H(n) = n^gamma / (gamma - 1),
H_c(1) = 0, P_c(1) = 0.

All functions are pure, accept scalars or numpy arrays of density values,
and evaluate pointwise; they are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PositivityError

__all__ = [
    "ResistivityProfile",
    "ConstitutiveParams",
    "pressure",
    "pressure_deriv",
    "cold_pressure",
    "cold_pressure_deriv",
    "enthalpy",
    "enthalpy_cold",
    "shear_viscosity",
    "shear_viscosity_deriv",
    "bulk_viscosity",
    "dispersion",
    "dispersion_deriv",
    "xi",
    "bd_drift_potential",
    "bd_potential_grad_factor",
    "resistivity",
    "check_resistivity_corridor",
]


def _scalarize(n_in, out):
    """Return a float when the input was scalar, else the array unchanged."""
    if np.ndim(n_in) == 0:
        return float(out)
    return out


def _require_nonnegative(n, what):
    if np.any(np.asarray(n) < 0):
        raise DomainError(f"{what} requires n >= 0")


def _require_positive(n, what):
    if np.any(np.asarray(n) <= 0):
        raise PositivityError(f"{what} requires strictly positive density")


@dataclass(frozen=True)
class ResistivityProfile:
    """Admissible corridor and concrete profile for the magnetic resistivity.

    The profile must sit between d0 s^(-a) and d0p s^(-ap) below the
    threshold B_thr, and between d1 and d1p s^b above it.  The concrete
    choice here is max(d1, d0 s^(-a)) clipped into the corridor; it is the
    simplest curve inside the admissible region, and any alternative can be
    tested by swapping in another profile instance.
    """

    d0: float = 1.0
    d0p: float = 4.0
    d1: float = 1.0
    d1p: float = 4.0
    a: float = 2.0
    ap: float = 2.5
    b: float = 1.0
    B_thr: float = 1.0

    def __post_init__(self):
        for name in ("d0", "d0p", "d1", "d1p"):
            if getattr(self, name) <= 0:
                raise ValueError(f"resistivity constant {name} must be > 0")
        if not (2.0 <= self.a < 3.0):
            raise ValueError("resistivity exponent a must lie in [2, 3)")
        if not (self.a < self.ap < 3.0):
            raise ValueError("resistivity exponent ap must lie in (a, 3)")
        if self.b < 0:
            raise ValueError("resistivity exponent b must be >= 0")
        if self.B_thr <= 0:
            raise ValueError("resistivity threshold B_thr must be > 0")
        # Corridor must be non-empty on both branches.
        if self.d0 * self.B_thr ** (self.a - self.ap) > self.d0p:
            raise ValueError("empty resistivity corridor below threshold")
        if self.d1 > self.d1p * self.B_thr**self.b:
            raise ValueError("empty resistivity corridor above threshold")

    def corridor(self, s):
        """Lower and upper admissible bounds at density s."""
        s = np.asarray(s, dtype=float)
        low = np.where(s < self.B_thr, self.d0 * s ** (-self.a), self.d1)
        high = np.where(s < self.B_thr, self.d0p * s ** (-self.ap), self.d1p * s**self.b)
        return low, high

    def __call__(self, s):
        sa = np.asarray(s, dtype=float)
        raw = np.maximum(self.d1, self.d0 * sa ** (-self.a))
        low, high = self.corridor(sa)
        return _scalarize(s, np.clip(raw, low, high))

    def scaled(self, factor):
        """Same shape, all four amplitude constants multiplied by `factor`."""
        return ResistivityProfile(
            d0=self.d0 * factor, d0p=self.d0p * factor,
            d1=self.d1 * factor, d1p=self.d1p * factor,
            a=self.a, ap=self.ap, b=self.b, B_thr=self.B_thr,
        )


@dataclass(frozen=True)
class ConstitutiveParams:
    """Physical constants and law exponents.

    gamma       adiabatic exponent, > 1
    gamma_minus singular cold-pressure exponent, >= 1 (> 4 required when the
                density-lower-bound audit is enabled)
    c1, c2      cold-pressure coefficients, > 0
    mu0         viscosity amplitude, > 0
    alpha       viscosity/dispersion exponent in (0, 1]
    hbar        quantum constant, >= 0
    """

    gamma: float = 2.0
    gamma_minus: float = 5.0
    c1: float = 1.0
    c2: float = 1.0
    mu0: float = 1.0
    alpha: float = 0.5
    hbar: float = 0.1
    resistivity: ResistivityProfile = field(default_factory=ResistivityProfile)

    def __post_init__(self):
        if self.gamma <= 1:
            raise ValueError("gamma must be > 1")
        if self.gamma_minus < 1:
            raise ValueError("gamma_minus must be >= 1")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("cold-pressure coefficients c1, c2 must be > 0")
        if self.mu0 <= 0:
            raise ValueError("mu0 must be > 0")
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha must lie in (0, 1]")
        if self.hbar < 0:
            raise ValueError("hbar must be >= 0")


def pressure(n, p: ConstitutiveParams):
    """Barotropic pressure n^gamma."""
    _require_nonnegative(n, "pressure")
    return _scalarize(n, np.asarray(n, dtype=float) ** p.gamma)


def pressure_deriv(n, p: ConstitutiveParams):
    """dP/dn = gamma n^(gamma-1)."""
    _require_nonnegative(n, "pressure_deriv")
    return _scalarize(n, p.gamma * np.asarray(n, dtype=float) ** (p.gamma - 1.0))


def cold_pressure_deriv(n, p: ConstitutiveParams):
    """dP_c/dn: c1 n^(-gamma_minus - 1) for n <= 1, c2 n^(gamma - 1) above.

    Positive on both branches, so the cold pressure is monotone increasing;
    the jump at n = 1 when c1 != c2 is allowed (only P_c itself is required
    to be continuous).
    """
    _require_positive(n, "cold_pressure_deriv")
    na = np.asarray(n, dtype=float)
    low = p.c1 * na ** (-p.gamma_minus - 1.0)
    high = p.c2 * na ** (p.gamma - 1.0)
    return _scalarize(n, np.where(na <= 1.0, low, high))


def cold_pressure(n, p: ConstitutiveParams):
    """Antiderivative of cold_pressure_deriv normalized to P_c(1) = 0.

    P_c(n) = (c1/gamma_minus) (1 - n^(-gamma_minus))  for n <= 1,
             (c2/gamma) (n^gamma - 1)                 for n >  1.

    Monotone increasing and unbounded below near vacuum; the vacuum blow-up
    lives in the cold enthalpy H_c, which diverges to +inf as n -> 0.
    """
    _require_positive(n, "cold_pressure")
    na = np.asarray(n, dtype=float)
    gm = p.gamma_minus
    low = (p.c1 / gm) * (1.0 - na ** (-gm))
    high = (p.c2 / p.gamma) * (na**p.gamma - 1.0)
    return _scalarize(n, np.where(na <= 1.0, low, high))


def enthalpy(n, p: ConstitutiveParams):
    """H(n) = n^gamma / (gamma - 1), satisfying n H'(n) - H(n) = P(n)."""
    _require_positive(n, "enthalpy")
    return _scalarize(n, np.asarray(n, dtype=float) ** p.gamma / (p.gamma - 1.0))


def enthalpy_cold(n, p: ConstitutiveParams):
    """H_c(n) = n * integral_1^n P_c(s)/s^2 ds in closed form, H_c(1) = 0.

    Satisfies n H_c'(n) - H_c(n) = P_c(n) and n H_c''(n) = P_c'(n); convex
    with minimum 0 at n = 1, diverging to +inf as n -> 0 (the vacuum
    penalty) and growing like n^gamma for large n.
    """
    _require_positive(n, "enthalpy_cold")
    na = np.asarray(n, dtype=float)
    g, gm = p.gamma, p.gamma_minus
    low = (p.c1 / gm) * (gm * na / (gm + 1.0) + na ** (-gm) / (gm + 1.0) - 1.0)
    high = (p.c2 / g) * (na**g / (g - 1.0) - g * na / (g - 1.0) + 1.0)
    return _scalarize(n, np.where(na <= 1.0, low, high))


def shear_viscosity(n, p: ConstitutiveParams):
    """mu(n) = mu0 n^alpha."""
    _require_nonnegative(n, "shear_viscosity")
    return _scalarize(n, p.mu0 * np.asarray(n, dtype=float) ** p.alpha)


def shear_viscosity_deriv(n, p: ConstitutiveParams):
    """mu'(n) = mu0 alpha n^(alpha-1); needs n > 0 when alpha < 1."""
    if p.alpha < 1.0:
        _require_positive(n, "shear_viscosity_deriv")
    else:
        _require_nonnegative(n, "shear_viscosity_deriv")
    na = np.asarray(n, dtype=float)
    if p.alpha == 1.0:
        return _scalarize(n, p.mu0 * np.ones_like(na))
    return _scalarize(n, p.mu0 * p.alpha * na ** (p.alpha - 1.0))


def bulk_viscosity(n, p: ConstitutiveParams):
    """lambda_visc(n) = 2 (n mu'(n) - mu(n)) = 2 mu0 (alpha - 1) n^alpha.

    Identically zero for alpha = 1 and negative for alpha < 1; callers must
    treat the associated dissipation line as signed.
    """
    _require_nonnegative(n, "bulk_viscosity")
    return _scalarize(n, 2.0 * p.mu0 * (p.alpha - 1.0) * np.asarray(n, dtype=float) ** p.alpha)


def dispersion(n, p: ConstitutiveParams):
    """Dispersion function phi(n) = n^alpha entering the quantum stress."""
    _require_nonnegative(n, "dispersion")
    return _scalarize(n, np.asarray(n, dtype=float) ** p.alpha)


def dispersion_deriv(n, p: ConstitutiveParams):
    """phi'(n) = alpha n^(alpha-1); needs n > 0 when alpha < 1."""
    if p.alpha < 1.0:
        _require_positive(n, "dispersion_deriv")
    na = np.asarray(n, dtype=float)
    if p.alpha == 1.0:
        return _scalarize(n, np.ones_like(na))
    return _scalarize(n, p.alpha * na ** (p.alpha - 1.0))


def xi(n, p: ConstitutiveParams):
    """xi(n) integrating n xi'(n) = mu'(n): mu0 alpha n^(alpha-1)/(alpha-1),
    with the logarithmic branch mu0 ln n at alpha = 1."""
    _require_positive(n, "xi")
    na = np.asarray(n, dtype=float)
    if p.alpha == 1.0:
        return _scalarize(n, p.mu0 * np.log(na))
    return _scalarize(n, p.mu0 * p.alpha * na ** (p.alpha - 1.0) / (p.alpha - 1.0))


def bd_drift_potential(n, p: ConstitutiveParams):
    """Bresch-Desjardins drift potential phi_BD = 2 xi(n), whose gradient is
    2 grad(mu(n)) / n."""
    _require_positive(n, "bd_drift_potential")
    na = np.asarray(n, dtype=float)
    if p.alpha == 1.0:
        return _scalarize(n, 2.0 * p.mu0 * np.log(na))
    return _scalarize(n, 2.0 * p.mu0 * p.alpha * na ** (p.alpha - 1.0) / (p.alpha - 1.0))


def bd_potential_grad_factor(n, p: ConstitutiveParams):
    """Scalar 2 mu'(n)/n = 2 mu0 alpha n^(alpha-2) multiplying grad n in the
    BD drift gradient."""
    _require_positive(n, "bd_potential_grad_factor")
    return _scalarize(n, 2.0 * p.mu0 * p.alpha * np.asarray(n, dtype=float) ** (p.alpha - 2.0))


def resistivity(n, p: ConstitutiveParams):
    """Magnetic resistivity nu_b(n) from the configured corridor profile."""
    _require_positive(n, "resistivity")
    return p.resistivity(n)


def check_resistivity_corridor(profile: ResistivityProfile, n_samples=1000,
                               s_min=1e-3, s_max=1e3):
    """Sample the profile on a log grid and verify both corridor inequalities.

    Returns (ok, worst_violation); worst_violation is the largest amount by
    which a bound was crossed (0.0 when the corridor holds everywhere).
    """
    s = np.logspace(np.log10(s_min), np.log10(s_max), n_samples)
    nu = profile(s)
    low, high = profile.corridor(s)
    viol = np.maximum(low - nu, nu - high)
    worst = float(np.max(viol))
    return worst <= 0.0, max(worst, 0.0)
