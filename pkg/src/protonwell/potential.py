"""Asymmetric quartic double well and the deep/shallow division of the axis.

The well is V(zeta) = barrier * (1 - zeta^2)^2 + (asymmetry / 2) * zeta
with both parameters in cm^-1 and zeta the dimensionless transfer
coordinate.  The quartic term alone has minima at zeta = +-1 and a
barrier of height `barrier` at zeta = 0; the linear term tilts the two
wells apart by `asymmetry` and nudges the barrier top slightly off
zeta = 0.  Everything downstream that needs a "which well" answer uses
the barrier-top position computed here, not zeta = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

# interior bracket for the barrier top: dV/dzeta is strictly decreasing on
# (-1/sqrt3, +1/sqrt3), so it has exactly one zero there and that zero is
# the local maximum of V whenever two minima exist
_BRACKET = 1.0 / np.sqrt(3.0)
_DERIV_TOL = 1e-10


@dataclass(frozen=True)
class DoubleWellParams:
    """Barrier height and well asymmetry, both in cm^-1."""

    barrier: float
    asymmetry: float

    def __post_init__(self):
        if not self.barrier > 0.0:
            raise ValueError(f"barrier must be > 0, got {self.barrier}")
        if not abs(self.asymmetry) < self.barrier:
            raise ValueError(
                f"|asymmetry| must be < barrier for two distinct minima, "
                f"got asymmetry={self.asymmetry}, barrier={self.barrier}"
            )


def evaluate(zeta, params: DoubleWellParams):
    """V(zeta) in cm^-1; accepts scalars or arrays."""
    z = np.asarray(zeta)
    v = params.barrier * (1.0 - z**2) ** 2 + 0.5 * params.asymmetry * z
    return float(v) if np.isscalar(zeta) else v


def derivative(zeta, params: DoubleWellParams):
    """dV/dzeta in cm^-1 per unit zeta."""
    z = np.asarray(zeta)
    d = -4.0 * params.barrier * z * (1.0 - z**2) + 0.5 * params.asymmetry
    return float(d) if np.isscalar(zeta) else d


def barrier_top(params: DoubleWellParams) -> tuple[float, float]:
    """Locate the interior maximum of V.

    Returns (zeta_star, v_star).  Root-finds dV/dzeta between the two
    inflection points, where the derivative changes sign exactly once.
    """
    dlo = derivative(-_BRACKET, params)
    dhi = derivative(_BRACKET, params)
    if not (dlo > 0.0 > dhi):
        raise ValueError(
            "no sign change of dV/dzeta inside (-1, 1); "
            "potential does not have an interior barrier"
        )
    zeta_star = brentq(
        lambda z: derivative(z, params), -_BRACKET, _BRACKET, xtol=1e-14, rtol=1e-15
    )
    if abs(derivative(zeta_star, params)) > _DERIV_TOL:
        raise RuntimeError("barrier-top root did not converge to tolerance")
    return float(zeta_star), evaluate(float(zeta_star), params)


def minima(params: DoubleWellParams) -> tuple[float, float]:
    """Positions (zeta_deep, zeta_shallow) of the two minima."""
    zeta_star, _ = barrier_top(params)
    left = brentq(lambda z: derivative(z, params), -2.0, zeta_star - 1e-9, xtol=1e-14)
    right = brentq(lambda z: derivative(z, params), zeta_star + 1e-9, 2.0, xtol=1e-14)
    v_left = evaluate(left, params)
    v_right = evaluate(right, params)
    # tie (symmetric well) resolved as deep-on-the-left
    if v_left <= v_right:
        return float(left), float(right)
    return float(right), float(left)


@dataclass(frozen=True)
class WellPartition:
    """Assignment of grid points to the deep and the shallow side.

    `divider` is the barrier-top position zeta*; points with
    zeta >= zeta* fall on the `shallow_mask` side when the deep well is
    the left one, and vice versa.  Points exactly at the divider count
    as shallow (deterministic tie-break).
    """

    divider: float
    deep_is_left: bool
    shallow_mask: np.ndarray  # boolean, one entry per grid point

    @property
    def deep_mask(self) -> np.ndarray:
        return ~self.shallow_mask


def partition(grid, params: DoubleWellParams) -> WellPartition:
    """Split a spatial grid at the barrier top.

    `grid` is a SpatialGrid (anything with a `points` array).  Raises if
    the grid does not straddle the divider, since then neither side would
    mean anything.
    """
    zeta_star, _ = barrier_top(params)
    points = grid.points
    if not (points[0] < zeta_star < points[-1]):
        raise ValueError(
            f"grid [{points[0]}, {points[-1]}] does not straddle the "
            f"barrier top at zeta*={zeta_star:.6g}"
        )
    zeta_deep, _ = minima(params)
    deep_is_left = zeta_deep < zeta_star
    if deep_is_left:
        shallow = points >= zeta_star
    else:
        shallow = points <= zeta_star
    return WellPartition(divider=zeta_star, deep_is_left=deep_is_left, shallow_mask=shallow)
