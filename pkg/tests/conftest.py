import numpy as np
import pytest

from qmhd2d import (
    ConstitutiveParams,
    Grid,
    QMHDSystem,
    RegularizationParams,
    ResistivityProfile,
)
from qmhd2d.spectral import GalerkinBall


@pytest.fixture(scope="session")
def grid32():
    return Grid(32)


@pytest.fixture(scope="session")
def grid48():
    return Grid(48)


@pytest.fixture
def cparams():
    return ConstitutiveParams(
        gamma=2.0, gamma_minus=5.0, c1=0.1, c2=0.1, mu0=0.1, alpha=0.5,
        hbar=0.05, resistivity=ResistivityProfile().scaled(0.05),
    )


def smooth_fields(grid, amp=0.1, n_bar=1.25):
    """Low-mode positive density, velocity and solenoidal magnetic field.

    The density window stays on one cold-pressure branch (n > 1) so that
    identity audits are not limited by the law's curvature jump at n = 1.
    """
    X, Y = grid.X, grid.Y
    n0 = n_bar + amp * (np.cos(X) * np.cos(Y) + 0.5 * np.sin(Y))
    u0 = amp * np.stack([
        np.sin(X) * np.cos(Y),
        0.5 * np.cos(2 * Y) - 0.3 * np.sin(X),
    ])
    B0 = grid.solenoidal_from_stream(
        amp * (np.cos(X + Y) + 0.3 * np.sin(2 * X)))
    return n0, u0, B0


def full_ball_system(grid, cparams, epsilon=0.0, lambda_reg=0.0, s=1):
    reg = RegularizationParams(epsilon=epsilon, lambda_reg=lambda_reg, s=s,
                               n_modes=GalerkinBall.max_modes(grid))
    return QMHDSystem(grid, cparams, reg)
