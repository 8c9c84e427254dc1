"""fewbound: ground states of small systems of identical particles and
symmetry-resolved lower bounds on their energies."""

from fewbound.symrep import (
    Partition,
    SymmetrySector,
    boson_sector,
    branching,
    conjugate,
    dimension,
    fermion_sector,
    ground_partition,
    partition,
    spin_sector_to_partition,
)

__version__ = "0.1.0"

__all__ = [
    "Partition",
    "SymmetrySector",
    "boson_sector",
    "branching",
    "conjugate",
    "dimension",
    "fermion_sector",
    "ground_partition",
    "partition",
    "spin_sector_to_partition",
    "__version__",
]
