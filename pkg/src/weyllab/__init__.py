"""Simulator for a dissipative resonator chain with two synthetic momenta.

The package computes the synthetic three-dimensional band structure of
the chain, the monopole charges of its band-touching points, the
edge-state sheets and their zero-energy arc under open boundaries, and
the driven-dissipative reflection protocol that reads all of this out
of a handful of lossy resonators.
"""

from .model import (
    DegenerateModelError,
    DVector,
    ModelParams,
    SyntheticMomentum,
    WeylPoint,
    bulk_bands,
    coupling_profile,
    d_vector,
    dispersive_map,
    linearize,
    onsite_profile,
    open_chain_hamiltonian,
    weyl_points,
)
from .numerics import (
    NumericsError,
    SingularMatrixError,
    TridiagonalSym,
    UndersampledLoopError,
    WindingResult,
    eigh_tridiagonal,
    solid_angle,
    solve_complex,
    unwrap_winding,
)
from .openchain import (
    ArcInterval,
    DensityProfile,
    EdgeSpectrumPoint,
    arc_interval_oracle,
    classify_localization,
    density_profile,
    diagonalize_chain,
    edge_spectrum,
)
from .spectroscopy import (
    ArcDetection,
    ReflectionTrace,
    SteadyState,
    detect_arc_endpoint,
    left_drive,
    reflection,
    reflection_spectrum,
    steady_state,
    transient_oracle,
    winding_measurement,
)
from .topology import (
    ChernResult,
    DegenerateGroundStateError,
    NonConvergedChernError,
    berry_curvature_numeric,
    berry_curvature_weyl,
    chern_mapped_torus,
    chern_sphere,
)

__version__ = "0.1.0"
