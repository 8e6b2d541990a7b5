"""Open-boundary diagonalization of the resonator chain.

Edge-state sheets over the (theta1, theta2) surface zone, per-state
localization labels, site-density profiles, and the diagonalization
oracle for the zero-energy arc interval that the spectroscopy layer
must reproduce.

At theta2 = +/-pi/2 the chain is mirror symmetric, so near-zero
eigenvectors come out of the solver as even/odd combinations with
equal weight on both ends.  Labeling is made basis-stable by rotating
each such +/-E pair to the combination that maximizes end-site weight
before classifying (the physical left/right quasi-modes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, open_chain_hamiltonian
from .numerics import eigh_tridiagonal

__all__ = [
    "EdgeSpectrumPoint",
    "DensityProfile",
    "ArcInterval",
    "edge_spectrum",
    "classify_localization",
    "density_profile",
    "arc_interval_oracle",
    "arc_membership",
    "max_symmetric_interval",
    "diagonalize_chain",
]

# Default zero-energy tolerance for arc membership, in units of J.
ZTOL_DEFAULT = 0.02
# Minimum end-cell weight for a Left/Right label.
EDGE_WEIGHT_MIN = 0.25
# +/-E pairs below this energy are mirror-rotated before labeling.
PAIR_WINDOW = 0.1


@dataclass(frozen=True)
class EdgeSpectrumPoint:
    theta1: float
    theta2: float
    eigenvalues: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) != self.eigenvalues.size:
            raise ValueError("labels must align with eigenvalues")


@dataclass(frozen=True)
class DensityProfile:
    site_densities: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.site_densities, dtype=float)
        if np.any(d < 0) or abs(d.sum() - 1.0) > 1e-10:
            raise ValueError("densities must be nonnegative and sum to 1")
        object.__setattr__(self, "site_densities", d)


@dataclass(frozen=True)
class ArcInterval:
    """Symmetric zero-mode interval (theta1c_minus, theta1c_plus).

    empty is True when no grid point carries a qualifying state; the
    endpoints are then meaningless.
    """

    theta1c_minus: float
    theta1c_plus: float
    empty: bool = False


def _cell_weights(v: np.ndarray) -> tuple[float, float]:
    first = float(v[0] ** 2 + v[1] ** 2)
    last = float(v[-2] ** 2 + v[-1] ** 2)
    return first, last


def classify_localization(v: np.ndarray) -> str:
    """Label a normalized eigenvector as Left, Right, or Bulk.

    Left means the first-unit-cell weight exceeds 0.25 and the weight
    on the last cell; Right is the mirror rule; anything else is Bulk.
    """
    v = np.asarray(v, dtype=float)
    first, last = _cell_weights(v)
    if first > EDGE_WEIGHT_MIN and first > last:
        return "Left"
    if last > EDGE_WEIGHT_MIN and last > first:
        return "Right"
    return "Bulk"


def density_profile(v: np.ndarray) -> DensityProfile:
    """Entrywise squared magnitudes of a normalized eigenvector."""
    v = np.asarray(v)
    return DensityProfile(np.abs(v) ** 2)


def _rotate_end_localized(v1: np.ndarray, v2: np.ndarray):
    """Rotate a 2D subspace to extremize end-cell weight difference.

    Diagonalizes the (first-cell minus last-cell) projector restricted
    to span{v1, v2}; returns (left-leaning, right-leaning) combinations.
    Deterministic regardless of the arbitrary basis the solver picked.
    """
    vecs = np.column_stack([v1, v2])
    d = np.zeros(vecs.shape[0])
    d[:2] = 1.0
    d[-2:] -= 1.0
    m = vecs.T @ (d[:, None] * vecs)
    _, rot = np.linalg.eigh(m)
    out = vecs @ rot
    w0 = _cell_weights(out[:, 0])
    w1 = _cell_weights(out[:, 1])
    if w0[0] - w0[1] >= w1[0] - w1[1]:
        return out[:, 0], out[:, 1]
    return out[:, 1], out[:, 0]


def diagonalize_chain(theta1: float, theta2: float, p: ModelParams):
    """Eigenvalues, labeling-ready eigenvectors, and labels of the chain.

    Returns (eigenvalues ascending, vectors as columns, labels).  The
    vectors of mirror-mixed near-zero +/-E pairs are replaced by their
    end-localized rotations; eigenvalues are reported unrotated.
    """
    h = open_chain_hamiltonian(theta1, theta2, p)
    vals, vecs = eigh_tridiagonal(h)
    vecs = vecs.copy()
    n = vals.size
    window = PAIR_WINDOW * p.J
    candidates = [i for i in range(n) if abs(vals[i]) < window]
    # Pair i-th smallest with i-th largest inside the window; for the
    # chiral-symmetric chain these are the +/-E partners.
    k = len(candidates)
    for a in range(k // 2):
        i, j = candidates[a], candidates[k - 1 - a]
        if i == j:
            continue
        vl, vr = _rotate_end_localized(vecs[:, i], vecs[:, j])
        vecs[:, i], vecs[:, j] = vl, vr
    labels = tuple(classify_localization(vecs[:, i]) for i in range(n))
    return vals, vecs, labels


def edge_spectrum(
    theta1_grid, theta2_grid, p: ModelParams
) -> list[EdgeSpectrumPoint]:
    """Open-chain spectrum with localization labels over a surface grid.

    One EdgeSpectrumPoint per (theta1, theta2) pair, in grid order
    (theta2 fastest).
    """
    if p.N < 2:
        raise ValueError("edge spectrum needs at least two unit cells")
    out = []
    for t1 in np.atleast_1d(theta1_grid):
        for t2 in np.atleast_1d(theta2_grid):
            vals, _, labels = diagonalize_chain(float(t1), float(t2), p)
            out.append(EdgeSpectrumPoint(float(t1), float(t2), vals, labels))
    return out


def _qualifies(theta1: float, theta2: float, ztol: float, p: ModelParams) -> bool:
    vals, _, labels = diagonalize_chain(theta1, theta2, p)
    near = np.abs(vals) < ztol
    return any(near[i] and labels[i] in ("Left", "Right") for i in range(vals.size))


def arc_membership(
    theta2: float, theta1_grid, ztol: float, p: ModelParams
) -> np.ndarray:
    """Per-grid-point arc membership from direct diagonalization.

    True where some eigenvalue has |E| < ztol * J and its
    (rotation-stabilized) eigenvector is labeled Left or Right.
    """
    grid = np.asarray(theta1_grid, dtype=float)
    return np.array([_qualifies(float(t), theta2, ztol * p.J, p) for t in grid])


def max_symmetric_interval(theta1_grid, ok) -> ArcInterval:
    """Largest interval [-t, t] whose grid points all satisfy `ok`.

    Endpoints are reported at grid resolution; an all-false grid (or a
    disqualified center) gives an empty-arc result.
    """
    grid = np.asarray(theta1_grid, dtype=float)
    order = np.argsort(grid)
    grid, ok = grid[order], np.asarray(ok, dtype=bool)[order]
    eps = 1e-9
    best = None
    for t in grid[grid >= -eps]:
        if not np.any(np.abs(grid + t) < eps):
            continue
        if ok[np.abs(grid) <= t + eps].all():
            best = float(t)
    if best is None:
        return ArcInterval(np.nan, np.nan, empty=True)
    return ArcInterval(-best, best)


def arc_interval_oracle(
    theta2: float,
    theta1_grid,
    ztol: float = ZTOL_DEFAULT,
    p: ModelParams = None,
) -> ArcInterval:
    """Maximal symmetric theta1 interval carrying an edge-localized
    near-zero state, from direct diagonalization.

    A grid point qualifies per arc_membership; the returned endpoints
    are the extremes of the largest all-qualifying interval [-t, t],
    at grid resolution.
    """
    if p is None:
        raise ValueError("model parameters required")
    if ztol <= 0:
        raise ValueError("ztol must be positive")
    return max_symmetric_interval(
        theta1_grid, arc_membership(theta2, theta1_grid, ztol, p)
    )
