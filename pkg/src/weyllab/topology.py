"""Berry curvature and Chern-number engines.

Monopole charges are computed two independent ways: geometrically, as
the degree of the unit-Bloch-vector map on a small sphere around a
node, and via gauge-invariant link variables (plaquette products) on
the mapped two-dimensional zone swept by a circle around the node's
(theta1, theta2) projection.

Orientation convention, used consistently everywhere: spheres are
outward-oriented, plaquette loops run counterclockwise in right-handed
axis order, and a node's charge equals sign(det v) of its linearized
velocity matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, SyntheticMomentum, WeylPoint, d_vector
from .numerics import solid_angle_batch

__all__ = [
    "ChernResult",
    "NonConvergedChernError",
    "DegenerateGroundStateError",
    "berry_curvature_weyl",
    "berry_curvature_numeric",
    "chern_sphere",
    "chern_mapped_torus",
]

# Accept a raw surface integral as an integer only this close to one.
ROUNDING_TOL = 0.05


class NonConvergedChernError(Exception):
    """Surface integral did not land near an integer."""


class DegenerateGroundStateError(Exception):
    """Ground state ill-defined: band splitting below tolerance."""


@dataclass(frozen=True)
class ChernResult:
    value: int
    raw: float
    mesh: int


def berry_curvature_weyl(q, charge: int) -> np.ndarray:
    """Analytic monopole field charge * q / (2 |q|^3) at offset q from a node."""
    if charge not in (-1, 1):
        raise ValueError("charge must be +1 or -1")
    q = np.asarray(q, dtype=float)
    if q.shape != (3,):
        raise ValueError("q must be a 3-vector")
    r = np.linalg.norm(q)
    if r == 0.0:
        raise ZeroDivisionError("Berry curvature is singular at the monopole")
    return charge * q / (2.0 * r**3)


def _bloch_vectors(kx, theta1, theta2, p: ModelParams):
    """Bloch vector components on broadcastable angle arrays."""
    hx = 2.0 * p.J * np.cos(kx)
    hy = 2.0 * p.J * np.cos(theta1) * np.sin(kx)
    hz = p.Je * np.cos(theta2)
    return np.broadcast_arrays(hx, hy, hz)


def _ground_states(hx, hy, hz, gauge_rng=None):
    """Lower-band spinors of h . sigma on a stacked grid, shape (..., 2).

    An optional RNG multiplies each spinor by a random phase; all
    downstream quantities are built from gauge-invariant products, so
    this must (and does) leave results unchanged.
    """
    shape = hx.shape
    mats = np.empty(shape + (2, 2), dtype=complex)
    mats[..., 0, 0] = hz
    mats[..., 1, 1] = -hz
    mats[..., 0, 1] = hx - 1j * hy
    mats[..., 1, 0] = hx + 1j * hy
    vals, vecs = np.linalg.eigh(mats)
    psi = vecs[..., :, 0]
    if gauge_rng is not None:
        psi = psi * np.exp(2j * np.pi * gauge_rng.random(shape))[..., None]
    return psi, vals[..., 1] - vals[..., 0]


def berry_curvature_numeric(
    k: SyntheticMomentum,
    plane: tuple[int, int],
    step: float,
    p: ModelParams,
    gauge_rng=None,
) -> float:
    """Lower-band Berry curvature component normal to `plane` at k.

    Computed from the phase of the product of the four normalized
    ground-state overlaps around a step x step plaquette spanned by the
    two axes in `plane` (0 = kx, 1 = theta1, 2 = theta2), divided by
    the plaquette area.  The returned component is the one completing
    the right-handed axis triple.
    """
    i, j = plane
    if i == j or not {i, j} <= {0, 1, 2}:
        raise ValueError("plane must be a pair of distinct axes from {0, 1, 2}")
    if step <= 0:
        raise ValueError("step must be positive")
    q0 = k.as_array()
    corners = np.tile(q0, (4, 1))
    corners[1, i] += step
    corners[2, i] += step
    corners[2, j] += step
    corners[3, j] += step
    psi, gap = _ground_states(
        *_bloch_vectors(corners[:, 0], corners[:, 1], corners[:, 2], p),
        gauge_rng=gauge_rng,
    )
    if gap.min() < 1e-6:
        raise DegenerateGroundStateError(
            f"band splitting {gap.min():.2e} below 1e-6 near {k}"
        )
    prod = 1.0 + 0.0j
    for a in range(4):
        ov = np.vdot(psi[a], psi[(a + 1) % 4])
        prod *= ov / abs(ov)
    # Sign fixed so that the flux of this field through an outward
    # sphere around a node is 2 pi times the node's degree (chern_sphere).
    return -float(np.angle(prod)) / step**2


def chern_sphere(
    w: WeylPoint, radius: float, mesh: int, p: ModelParams
) -> ChernResult:
    """Monopole charge as the degree of the unit-Bloch-vector map.

    The sphere of the given radius around the node is triangulated on a
    latitude-longitude grid (poles as triangle fans) and the degree is
    the sum of signed solid angles of the image triangles over 4 pi.
    Outward orientation; radius must keep every other node outside.
    """
    if not (0.0 < radius < np.pi / 2):
        raise ValueError("radius must lie in (0, pi/2)")
    if mesh < 8:
        raise ValueError("mesh must be at least 8")
    nth, nph = mesh, 2 * mesh
    theta = np.linspace(0.0, np.pi, nth + 1)
    phi = np.linspace(0.0, 2.0 * np.pi, nph, endpoint=False)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    normals = np.stack(
        [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
    )
    q0 = w.location.as_array()
    pts = q0 + radius * normals
    hx, hy, hz = _bloch_vectors(pts[..., 0], pts[..., 1], pts[..., 2], p)
    h = np.stack([hx, hy, hz], axis=-1)
    norm = np.linalg.norm(h, axis=-1)
    if norm.min() < 1e-12:
        raise NonConvergedChernError("sphere touches a band-degeneracy point")
    hhat = h / norm[..., None]

    # Quad (i,j)-(i+1,j)-(i+1,j+1)-(i,j+1) split into two triangles with
    # the (theta, phi) orientation, which is outward on the sphere.
    va = hhat[:-1, :]
    vb = hhat[1:, :]
    vc = np.roll(hhat, -1, axis=1)[1:, :]
    vd = np.roll(hhat, -1, axis=1)[:-1, :]
    total = solid_angle_batch(va, vb, vc).sum() + solid_angle_batch(va, vc, vd).sum()
    raw = float(total / (4.0 * np.pi))
    value = int(np.rint(raw))
    if abs(raw - value) > ROUNDING_TOL:
        raise NonConvergedChernError(
            f"degree {raw:.4f} not within {ROUNDING_TOL} of an integer; "
            "refine the mesh or shrink the sphere"
        )
    return ChernResult(value, raw, mesh)


def chern_mapped_torus(
    w: WeylPoint,
    theta_r: float,
    grid: int,
    p: ModelParams,
    gauge_rng=None,
) -> ChernResult:
    """Link-variable Chern number of the circle-mapped two-band model.

    The circle theta -> (theta1w + theta_r cos theta, theta2w +
    theta_r sin theta) around the node's projection turns the Bloch
    matrix into a gapped family h(kx, theta) on the torus
    kx, theta in [0, 2pi).  Its lower-band Chern number is accumulated
    from plaquette-product phases.  The full kx period wraps the node
    twice (the node and its equal-charge partner at kx + pi), so the
    reported value is raw / 2 rounded, with raw alongside.
    """
    if not (0.0 < theta_r < np.pi / 2):
        raise ValueError("theta_r must lie in (0, pi/2)")
    if grid < 20:
        raise ValueError("grid must be at least 20")
    kx = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    th = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    kk, tt = np.meshgrid(kx, th, indexing="ij")
    th1 = w.location.theta1 + theta_r * np.cos(tt)
    th2 = w.location.theta2 + theta_r * np.sin(tt)
    psi, gap = _ground_states(*_bloch_vectors(kk, th1, th2, p), gauge_rng=gauge_rng)
    if gap.min() < 1e-9:
        raise DegenerateGroundStateError(
            "gap closes on the mapped torus; shrink theta_r"
        )

    def link(axis):
        ov = np.sum(psi.conj() * np.roll(psi, -1, axis=axis), axis=-1)
        mag = np.abs(ov)
        if mag.min() < 1e-12:
            raise DegenerateGroundStateError(
                "vanishing plaquette overlap; shrink theta_r or refine the grid"
            )
        return ov / mag

    u1 = link(0)
    u2 = link(1)
    fluxes = np.angle(u1 * np.roll(u2, -1, axis=0) / (np.roll(u1, -1, axis=1) * u2))
    raw = float(fluxes.sum() / (2.0 * np.pi))
    value = int(np.rint(raw / 2.0))
    if abs(raw / 2.0 - value) > ROUNDING_TOL:
        raise NonConvergedChernError(
            f"half-degree {raw / 2.0:.4f} not within {ROUNDING_TOL} of an integer"
        )
    return ChernResult(value, raw, grid)
