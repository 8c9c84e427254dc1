from fewbound.fewbody.elements import GaussianBasisElement, SectorContext, compute_block
from fewbound.fewbody.solver import (
    SolveResult,
    SolverConfig,
    antisymmetrized_matrix_elements,
    harmonic_exact_energy,
    pair_length_scale,
    solve,
)

__all__ = [
    "GaussianBasisElement",
    "SectorContext",
    "SolveResult",
    "SolverConfig",
    "antisymmetrized_matrix_elements",
    "compute_block",
    "harmonic_exact_energy",
    "pair_length_scale",
    "solve",
]
