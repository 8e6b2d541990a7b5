"""Parametrized lattice model.

A one-dimensional two-site-per-cell resonator chain whose hopping and
on-site profiles are steered by two cyclic control angles (theta1,
theta2).  Together with the chain momentum kx these angles span a
synthetic three-dimensional Brillouin zone in which the two Bloch bands
touch at four isolated points.

Conventions: energies are measured in units of the mean hopping J
(J = 1 by default, and Je = J), and the global detuning offset Delta0
is *not* part of the lattice matrices here -- it is a drive property
applied by the spectroscopy layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import TridiagonalSym

__all__ = [
    "ModelParams",
    "SyntheticMomentum",
    "DVector",
    "WeylPoint",
    "DegenerateModelError",
    "coupling_profile",
    "onsite_profile",
    "dispersive_map",
    "d_vector",
    "bulk_bands",
    "weyl_points",
    "linearize",
    "open_chain_hamiltonian",
]


class DegenerateModelError(Exception):
    """Model parameters degenerate the band-touching structure."""


def _reduce_angle(x: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    return math.pi - math.fmod(math.pi - x, 2.0 * math.pi)


@dataclass(frozen=True)
class ModelParams:
    """Experimental knobs of the chain.

    J      -- mean hopping, the energy unit (> 0)
    Je     -- on-site modulation amplitude, in units of J (>= 0)
    Delta0 -- drive detuning offset, in units of J
    kappa  -- resonator decay rate, in units of J (>= 0)
    N      -- number of unit cells; the open chain has 2N resonators
    """

    J: float = 1.0
    Je: float = 1.0
    Delta0: float = -0.1
    kappa: float = 0.1
    N: int = 2

    def __post_init__(self):
        if not (self.J > 0):
            raise ValueError("J must be positive")
        if self.Je < 0:
            raise ValueError("Je must be nonnegative")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValueError("N must be a positive integer (unit cells)")
        for name in ("J", "Je", "Delta0", "kappa"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def sites(self) -> int:
        return 2 * self.N


@dataclass(frozen=True)
class SyntheticMomentum:
    """Point (kx, theta1, theta2) in the synthetic Brillouin zone.

    Components are stored reduced to (-pi, pi]; every function of the
    momentum is 2pi-periodic in each component.
    """

    kx: float
    theta1: float
    theta2: float

    def __post_init__(self):
        for name in ("kx", "theta1", "theta2"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, _reduce_angle(float(v)))

    def as_array(self) -> np.ndarray:
        return np.array([self.kx, self.theta1, self.theta2])

    def shifted(self, dq: np.ndarray) -> "SyntheticMomentum":
        q = self.as_array() + np.asarray(dq, dtype=float)
        return SyntheticMomentum(*q)


@dataclass(frozen=True)
class DVector:
    """Bloch decomposition (delta0, hx, hy, hz) of the 2x2 momentum matrix."""

    delta0: float
    hx: float
    hy: float
    hz: float

    def magnitude(self) -> float:
        return math.sqrt(self.hx**2 + self.hy**2 + self.hz**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.hx, self.hy, self.hz])

    def matrix(self) -> np.ndarray:
        """The Hermitian 2x2 Bloch matrix delta0 + h . sigma."""
        return np.array(
            [
                [self.delta0 + self.hz, self.hx - 1j * self.hy],
                [self.hx + 1j * self.hy, self.delta0 - self.hz],
            ]
        )


@dataclass(frozen=True)
class WeylPoint:
    """Band-touching point with its linearization.

    velocity[i, j] = d h_j / d q_i at the node; chirality is
    sign(det velocity) under this artifact's orientation convention
    (outward Berry flux positive).
    """

    location: SyntheticMomentum
    velocity: np.ndarray
    chirality: int

    def __post_init__(self):
        v = np.asarray(self.velocity, dtype=float)
        if v.shape != (3, 3):
            raise ValueError("velocity must be a 3x3 matrix")
        object.__setattr__(self, "velocity", v)
        det = np.linalg.det(v)
        if self.chirality not in (-1, 1) or np.sign(det) != self.chirality:
            raise ValueError("chirality must equal sign(det velocity)")


def coupling_profile(theta1: float, p: ModelParams) -> tuple[float, float]:
    """Alternating hopping pair (J1, J2) at control angle theta1.

    J1 = J (1 - cos theta1) couples the two resonators inside a cell,
    J2 = J (1 + cos theta1) couples neighboring cells; J1 + J2 = 2J.
    """
    c = math.cos(theta1)
    return p.J * (1.0 - c), p.J * (1.0 + c)


def onsite_profile(theta2: float, p: ModelParams) -> tuple[float, float]:
    """Staggered on-site shifts (relative to Delta0) at angle theta2."""
    m = p.Je * math.cos(theta2)
    return m, -m


def dispersive_map(g: float, Delta: float) -> float:
    """Qubit-mediated photon hopping rate -g^2 / Delta.

    g and Delta are physical frequencies (e.g. GHz); this is the only
    place physical units enter.  Delta = 0 means the dispersive
    approximation is invalid.
    """
    if Delta == 0:
        raise ValueError("zero qubit detuning: dispersive regime invalid")
    return -(g * g) / Delta


def d_vector(k: SyntheticMomentum, p: ModelParams) -> DVector:
    """Bloch vector of the momentum-space matrix at k."""
    hx = 2.0 * p.J * math.cos(k.kx)
    hy = 2.0 * p.J * math.cos(k.theta1) * math.sin(k.kx)
    hz = p.Je * math.cos(k.theta2)
    return DVector(p.Delta0, hx, hy, hz)


def bulk_bands(k: SyntheticMomentum, p: ModelParams) -> tuple[float, float]:
    """The two bulk band energies (E-, E+) = Delta0 -/+ |h| at k."""
    h = d_vector(k, p).magnitude()
    return p.Delta0 - h, p.Delta0 + h


_WEYL_LOCATIONS = (
    (math.pi / 2, math.pi / 2, math.pi / 2),
    (math.pi / 2, math.pi / 2, -math.pi / 2),
    (math.pi / 2, -math.pi / 2, -math.pi / 2),
    (math.pi / 2, -math.pi / 2, math.pi / 2),
)


def weyl_points(p: ModelParams) -> list[WeylPoint]:
    """The four band-touching points in the reduced zone kx in (0, pi].

    They sit at (pi/2, +/-pi/2, +/-pi/2) and exhaust the zero set of
    (hx, hy, hz).  Je = 0 collapses them into nodal lines, which is
    rejected.
    """
    if p.Je == 0:
        raise DegenerateModelError(
            "Je = 0 leaves hz identically zero: nodal lines instead of Weyl points"
        )
    return [linearize(SyntheticMomentum(*loc), p) for loc in _WEYL_LOCATIONS]


def linearize(w: SyntheticMomentum, p: ModelParams) -> WeylPoint:
    """Linearized node at w: velocity v_ij = d h_j / d q_i and chirality.

    The derivatives are exact partials of the Bloch vector; w must be a
    band-touching point.
    """
    d = d_vector(w, p)
    if d.magnitude() > 1e-9 * max(p.J, p.Je):
        raise ValueError(f"momentum {w} is not a band-touching point")
    skx, ckx = math.sin(w.kx), math.cos(w.kx)
    v = np.array(
        [
            [-2.0 * p.J * skx, 2.0 * p.J * math.cos(w.theta1) * ckx, 0.0],
            [0.0, -2.0 * p.J * math.sin(w.theta1) * skx, 0.0],
            [0.0, 0.0, -p.Je * math.sin(w.theta2)],
        ]
    )
    chirality = int(np.sign(np.linalg.det(v)))
    if chirality == 0:
        raise DegenerateModelError("vanishing velocity determinant at the node")
    return WeylPoint(w, v, chirality)


def open_chain_hamiltonian(
    theta1: float, theta2: float, p: ModelParams
) -> TridiagonalSym:
    """Open-boundary chain Hamiltonian at (theta1, theta2), without Delta0.

    Site order a1, b1, a2, b2, ...; the diagonal alternates
    (+Je cos theta2, -Je cos theta2) and the off-diagonal alternates
    (J1, J2, J1, ...) starting with the intra-cell J1.  The drive
    detuning Delta0 is a uniform shift applied by consumers.
    """
    n = p.sites
    j1, j2 = coupling_profile(theta1, p)
    sa, sb = onsite_profile(theta2, p)
    diag = np.empty(n)
    diag[0::2] = sa
    diag[1::2] = sb
    off = np.empty(n - 1)
    off[0::2] = j1
    off[1::2] = j2
    return TridiagonalSym(diag, off)
