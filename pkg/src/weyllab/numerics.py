"""Dense numerical kernels.

Symmetric tridiagonal eigensolver, pivoted complex linear solves,
phase-loop winding extraction, and signed spherical solid angles.
Everything here is a pure function of its inputs; no shared state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

__all__ = [
    "NumericsError",
    "SingularMatrixError",
    "UndersampledLoopError",
    "TridiagonalSym",
    "WindingResult",
    "eigh_tridiagonal",
    "solve_complex",
    "unwrap_winding",
    "solid_angle",
]

# Residual / orthonormality bound, relative to max(1, ||H||_inf).
EIG_TOL = 1e-10
# Solve residual bound, relative to ||A||_inf ||x|| + ||b||.
SOLVE_TOL = 1e-10
# Any principal-value phase step at or beyond this magnitude is
# considered undersampled; winding cannot be trusted past pi.
PHASE_STEP_LIMIT = np.pi - 0.1


class NumericsError(Exception):
    """Base class for numerical-kernel failures."""


class SingularMatrixError(NumericsError):
    """Linear system is singular to working precision."""


class UndersampledLoopError(NumericsError):
    """Phase loop sampled too coarsely to unwrap reliably."""


@dataclass(frozen=True)
class TridiagonalSym:
    """Real symmetric tridiagonal matrix stored as its two bands.

    diag has length n, offdiag has length n - 1.  Entries are in units
    of the hopping energy scale of whatever model produced them.
    """

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or e.ndim != 1:
            raise ValueError("diag and offdiag must be one-dimensional")
        if d.size < 1:
            raise ValueError("matrix dimension must be at least 1")
        if e.size != d.size - 1:
            raise ValueError(
                f"offdiag length {e.size} inconsistent with diag length {d.size}"
            )
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("non-finite entries in tridiagonal matrix")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def dim(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        h = np.diag(self.diag)
        if self.offdiag.size:
            h += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return h

    def inf_norm(self) -> float:
        return float(np.abs(self.to_dense()).sum(axis=1).max())


class WindingResult(NamedTuple):
    winding: int
    residual: float


def eigh_tridiagonal(h: TridiagonalSym) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a real symmetric tridiagonal matrix.

    Returns (eigenvalues, eigenvectors) with eigenvalues ascending and
    eigenvectors as orthonormal columns.  Uses the implicit-shift QL/QR
    iteration on the tridiagonal form (LAPACK stev); matrices here are
    desk-scale, so no blocking or MRRR subtleties are needed.
    """
    if h.dim == 1:
        return h.diag.copy(), np.ones((1, 1))
    vals, vecs = scipy.linalg.eigh_tridiagonal(
        h.diag, h.offdiag, lapack_driver="stev"
    )
    return vals, vecs


def solve_complex(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for complex A via LU with partial pivoting.

    Raises SingularMatrixError when A is singular to working precision
    (residual exceeding SOLVE_TOL * (||A||_inf ||x|| + ||b||)).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if b.shape != (a.shape[0],):
        raise ValueError(f"right-hand side shape {b.shape} does not match {a.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite entries in linear system")
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    # A backward-stable LU happily "solves" a singular system with a
    # huge x and a tiny residual, so check conditioning as well.
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularMatrixError(
            f"system singular to working precision (cond {cond:.3e})"
        )
    norm_a = np.abs(a).sum(axis=1).max()
    resid = np.linalg.norm(a @ x - b)
    scale = norm_a * np.linalg.norm(x) + np.linalg.norm(b)
    if not np.all(np.isfinite(x)) or resid > SOLVE_TOL * scale:
        raise SingularMatrixError(
            f"system singular to working precision (residual {resid:.3e})"
        )
    return x


def _principal(phi: np.ndarray) -> np.ndarray:
    """Wrap angles to the principal branch (-pi, pi]."""
    return np.pi - np.mod(np.pi - phi, 2.0 * np.pi)


def unwrap_winding(phases: np.ndarray) -> WindingResult:
    """Integer winding of a phase list sampled once around a closed loop.

    The first sample corresponds to loop parameter 0 and the loop closes
    back onto it; the closing step is included in the sum.  Consecutive
    principal-value differences must stay below pi in magnitude
    (UndersampledLoopError otherwise), so the winding is unambiguous.
    """
    phi = np.asarray(phases, dtype=float)
    if phi.ndim != 1 or phi.size < 2:
        raise ValueError("need a one-dimensional list of at least two phases")
    if not np.all(np.isfinite(phi)):
        raise ValueError("non-finite phases")
    steps = _principal(np.diff(phi, append=phi[:1]))
    worst = np.abs(steps).max()
    if worst >= PHASE_STEP_LIMIT:
        raise UndersampledLoopError(
            f"phase step of {worst:.3f} rad detected; sample the loop more finely"
        )
    raw = steps.sum() / (2.0 * np.pi)
    winding = int(np.rint(raw))
    return WindingResult(winding, float(raw - winding))


def solid_angle(v1, v2, v3) -> float:
    """Signed solid angle of the spherical triangle (v1, v2, v3).

    Inputs are nonzero 3-vectors, normalized internally.  The sign
    follows the orientation of the vertex order (antisymmetric under
    swapping two arguments).  Triples coplanar with the origin are
    degenerate and return 0.
    """
    vs = []
    for v in (v1, v2, v3):
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if not np.isfinite(n) or n == 0.0:
            raise ValueError("vertices must be finite nonzero 3-vectors")
        vs.append(v / n)
    a, b, c = vs
    num = float(a @ np.cross(b, c))
    den = 1.0 + float(a @ b) + float(b @ c) + float(c @ a)
    if abs(num) < 1e-14:
        return 0.0
    return 2.0 * float(np.arctan2(num, den))


def solid_angle_batch(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Vectorized solid_angle over stacked unit vectors of shape (..., 3).

    Callers must pass already-normalized vertices; degenerate triples
    come out as 0 exactly as in the scalar version.
    """
    num = np.einsum("...i,...i->...", a, np.cross(b, c))
    den = (
        1.0
        + np.einsum("...i,...i->...", a, b)
        + np.einsum("...i,...i->...", b, c)
        + np.einsum("...i,...i->...", c, a)
    )
    out = 2.0 * np.arctan2(num, den)
    out[np.abs(num) < 1e-14] = 0.0
    return out
