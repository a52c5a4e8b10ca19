"""Periodic 2-D field calculus on [0, 2pi)^2.

Real scalar fields are (nx, ny) arrays of collocation values, vector fields
are (2, nx, ny), rank-2 tensor fields (2, 2, nx, ny).  Differentiation is
exact on the trigonometric interpolant (Fourier symbol multiplication), and
pointwise products are stabilized with the standard 2/3-rule truncation.

The Galerkin velocity space is the span of the lowest Fourier modes, ordered
by increasing |k| with lexicographic tie-break; conjugate wavevector pairs
are always selected together so the span contains only real fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Grid", "GalerkinBall", "GalerkinVelocity"]


class Grid:
    """Uniform collocation grid on the periodic box [0, 2pi)^2.

    nx, ny must be even and >= 8.  Wavenumbers are integers; the Nyquist
    column is excluded from the dealias mask, so every retained mode has a
    conjugate partner on the grid.
    """

    def __init__(self, nx: int, ny: int | None = None):
        ny = nx if ny is None else ny
        if nx < 8 or ny < 8 or nx % 2 or ny % 2:
            raise ValueError("grid sizes must be even and >= 8")
        self.nx = nx
        self.ny = ny
        self.x = 2.0 * np.pi * np.arange(nx) / nx
        self.y = 2.0 * np.pi * np.arange(ny) / ny
        self.X, self.Y = np.meshgrid(self.x, self.y, indexing="ij")
        kx = np.fft.fftfreq(nx, d=1.0 / nx)
        ky = np.fft.fftfreq(ny, d=1.0 / ny)
        self.KX, self.KY = np.meshgrid(kx, ky, indexing="ij")
        self.K2 = self.KX**2 + self.KY**2
        self.cell_area = (2.0 * np.pi / nx) * (2.0 * np.pi / ny)
        # 2/3-rule mask, applied after every pointwise product.
        self.dealias_kx = nx // 3
        self.dealias_ky = ny // 3
        self.dealias_mask = (np.abs(self.KX) <= self.dealias_kx) & (
            np.abs(self.KY) <= self.dealias_ky
        )
        self._ikx = 1j * self.KX
        self._iky = 1j * self.KY

    # -- transforms -------------------------------------------------------

    def to_spectral(self, f):
        return np.fft.fft2(f, axes=(-2, -1))

    def to_real(self, fh):
        return np.fft.ifft2(fh, axes=(-2, -1)).real

    # -- derivatives (exact on the interpolant) ---------------------------

    def ddx(self, f):
        return self.to_real(self._ikx * self.to_spectral(f))

    def ddy(self, f):
        return self.to_real(self._iky * self.to_spectral(f))

    def grad(self, f):
        fh = self.to_spectral(f)
        return np.stack([self.to_real(self._ikx * fh), self.to_real(self._iky * fh)])

    def div(self, v):
        return self.ddx(v[0]) + self.ddy(v[1])

    def laplacian(self, f):
        return self.to_real(-self.K2 * self.to_spectral(f))

    def hyper(self, f, k: int):
        """Iterated Laplacian mapped through the symbol (-|k|^2)^k."""
        if k < 1:
            raise ValueError("hyper order must be >= 1")
        return self.to_real((-self.K2) ** k * self.to_spectral(f))

    def grad_tensor(self, u):
        """G[i, j] = d u_i / d x_j for a vector field u."""
        uh = self.to_spectral(u)
        gx = self.to_real(self._ikx * uh)
        gy = self.to_real(self._iky * uh)
        return np.stack([gx, gy], axis=1)

    def sym_grad(self, u):
        g = self.grad_tensor(u)
        return 0.5 * (g + g.transpose(1, 0, 2, 3))

    def antisym_grad(self, u):
        g = self.grad_tensor(u)
        return 0.5 * (g - g.transpose(1, 0, 2, 3))

    def div_tensor(self, T):
        """Row-wise divergence (div T)_i = d T[i, j] / d x_j."""
        return np.stack([self.div(T[0]), self.div(T[1])])

    # -- in-plane magnetics ------------------------------------------------

    def curl2(self, v):
        """Out-of-plane curl d_x v_y - d_y v_x of an in-plane vector field."""
        return self.ddx(v[1]) - self.ddy(v[0])

    def curl_scalar(self, e):
        """In-plane curl (d_y e, -d_x e) of an out-of-plane scalar; its image
        is exactly divergence-free."""
        eh = self.to_spectral(e)
        return np.stack([self.to_real(self._iky * eh), self.to_real(-self._ikx * eh)])

    def emf(self, u, B):
        """Out-of-plane component of u x B."""
        return u[0] * B[1] - u[1] * B[0]

    def lorentz(self, B):
        """(curl B) x B = j (-B_y, B_x) with j the out-of-plane current."""
        j = self.curl2(B)
        return np.stack([-j * B[1], j * B[0]])

    # -- dealiasing and projections ----------------------------------------

    def dealias(self, f):
        return self.to_real(self.dealias_mask * self.to_spectral(f))

    def project(self, f, mask):
        """L2-orthogonal projection of a real field onto the masked modes."""
        return self.to_real(mask * self.to_spectral(f))

    # -- quadrature (collocation sums, spectrally accurate) ----------------

    def integrate(self, f):
        return float(np.sum(f) * self.cell_area)

    def inner(self, f, g):
        """L2 inner product; sums over components for vector/tensor fields."""
        return float(np.sum(f * g) * self.cell_area)

    def l2(self, f):
        return float(np.sqrt(max(self.inner(f, f), 0.0)))

    def lp_norm(self, f, p):
        return float(self.integrate(np.abs(f) ** p) ** (1.0 / p))

    def weighted_seminorm_sq(self, f, power: int):
        """integral of |nabla^(power/2) f|^2 via Parseval: the weight is
        |k|^power on the squared spectrum.  f may be scalar or vector."""
        fh = self.to_spectral(f)
        w = self.K2 ** (power // 2) if power % 2 == 0 else self.K2 ** (power / 2.0)
        total = np.sum(w * np.abs(fh) ** 2)
        return float((2.0 * np.pi) ** 2 * total / (self.nx * self.ny) ** 2)

    def sobolev_seminorm_sq(self, f, m: int):
        """integral of |nabla^m f|^2 summed over all m-index components."""
        return self.weighted_seminorm_sq(f, 2 * m)

    def solenoidal_from_stream(self, a):
        """Divergence-free vector field (d_y a, -d_x a) from a stream scalar."""
        return self.curl_scalar(a)


@dataclass(frozen=True)
class GalerkinBall:
    """Mask of the lowest-|k| Fourier modes, closed under k -> -k.

    `count` is the number of complex exponentials retained (== the real
    dimension of the span).  The ball always lies inside the dealias region,
    so that density-weighted products of ball fields project consistently.
    """

    mask: np.ndarray
    count: int
    k_max: float

    @staticmethod
    def build(grid: Grid, n_modes: int) -> "GalerkinBall":
        if n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        kx_lim, ky_lim = grid.dealias_kx, grid.dealias_ky
        candidates = [
            (kx * kx + ky * ky, kx, ky)
            for kx in range(-kx_lim, kx_lim + 1)
            for ky in range(-ky_lim, ky_lim + 1)
        ]
        candidates.sort()
        if n_modes > len(candidates):
            raise ValueError(
                f"n_modes={n_modes} exceeds the {len(candidates)} modes "
                f"available inside the dealias region of a {grid.nx}x{grid.ny} grid"
            )
        selected: set[tuple[int, int]] = set()
        for _, kx, ky in candidates:
            if len(selected) >= n_modes:
                break
            if (kx, ky) in selected:
                continue
            selected.add((kx, ky))
            selected.add((-kx, -ky))  # keep the span closed under conjugation
        mask = np.zeros((grid.nx, grid.ny), dtype=bool)
        k_max = 0.0
        for kx, ky in selected:
            mask[kx % grid.nx, ky % grid.ny] = True
            k_max = max(k_max, float(np.hypot(kx, ky)))
        return GalerkinBall(mask=mask, count=len(selected), k_max=k_max)

    @staticmethod
    def max_modes(grid: Grid) -> int:
        """Number of modes in the full dealias region (the largest legal ball)."""
        return (2 * grid.dealias_kx + 1) * (2 * grid.dealias_ky + 1)


class GalerkinVelocity:
    """Velocity constrained to a Galerkin ball: one complex coefficient array
    per component, exactly zero outside the ball, plus a cached collocation
    image."""

    __slots__ = ("grid", "ball", "coeff", "_values")

    def __init__(self, grid: Grid, ball: GalerkinBall, coeff: np.ndarray):
        self.grid = grid
        self.ball = ball
        self.coeff = coeff
        self._values = None

    @classmethod
    def zeros(cls, grid: Grid, ball: GalerkinBall) -> "GalerkinVelocity":
        return cls(grid, ball, np.zeros((2, grid.nx, grid.ny), dtype=complex))

    @classmethod
    def from_field(cls, grid: Grid, ball: GalerkinBall, u_vals) -> "GalerkinVelocity":
        """Project a collocation vector field onto the ball."""
        coeff = ball.mask * grid.to_spectral(np.asarray(u_vals, dtype=float))
        return cls(grid, ball, coeff)

    @property
    def values(self):
        if self._values is None:
            self._values = self.grid.to_real(self.coeff)
        return self._values

    def with_coeff(self, coeff) -> "GalerkinVelocity":
        return GalerkinVelocity(self.grid, self.ball, coeff)

    def copy(self) -> "GalerkinVelocity":
        return GalerkinVelocity(self.grid, self.ball, self.coeff.copy())

    def coeff_norm(self) -> float:
        """L2 norm of the velocity field, evaluated on coefficients."""
        total = np.sum(np.abs(self.coeff) ** 2)
        return float(np.sqrt((2.0 * np.pi) ** 2 * total) / (self.grid.nx * self.grid.ny))

    def l2(self) -> float:
        return self.coeff_norm()
