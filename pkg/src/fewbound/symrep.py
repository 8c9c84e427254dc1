"""Integer partitions (Young diagrams) of the symmetric group and the exact
rational coefficient algebra used by the energy bounds.

All weights are exact `fractions.Fraction`; nothing here touches floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

# Eq.-style dimension products overflow silently past ~N=20 only if done in
# fixed-width ints; python ints are exact, but the cap keeps the library inside
# its validated regime.
MAX_PARTICLES = 20


@dataclass(frozen=True, order=True)
class Partition:
    """Non-increasing positive row lengths; canonical form has no trailing zeros."""

    rows: tuple[int, ...]

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        if len(rows) == 0:
            raise ValueError("partition must have at least one row")
        if any(r <= 0 for r in rows):
            raise ValueError(f"partition rows must be positive: {rows}")
        if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
            raise ValueError(f"partition rows must be non-increasing: {rows}")
        if sum(rows) > MAX_PARTICLES:
            raise ValueError(
                f"partitions of N > {MAX_PARTICLES} are outside the supported range"
            )
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        """Total box count N."""
        return sum(self.rows)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def conjugate(self) -> "Partition":
        """Transpose the diagram (rows and columns interchanged)."""
        width = self.rows[0]
        cols = [sum(1 for r in self.rows if r > j) for j in range(width)]
        return Partition(tuple(cols))

    def removable_rows(self) -> list[int]:
        """1-based indices of rows a box can be dropped from."""
        rows = self.rows
        return [
            p + 1
            for p in range(len(rows))
            if p == len(rows) - 1 or rows[p] > rows[p + 1]
        ]

    def remove_box(self, row: int) -> "Partition":
        """Partition with one box removed from 1-based `row` (must be removable)."""
        if row not in self.removable_rows():
            raise ValueError(f"row {row} of {self} is not removable")
        new = list(self.rows)
        new[row - 1] -= 1
        if new[row - 1] == 0:
            new.pop(row - 1)
        if not new:
            raise ValueError("cannot remove the last box of [1]")
        return Partition(tuple(new))

    def __str__(self) -> str:
        return "[" + ",".join(str(r) for r in self.rows) + "]"


def partition(*rows: int) -> Partition:
    """Convenience constructor: partition(2, 1) == Partition((2, 1))."""
    return Partition(tuple(rows))


def dimension(p: Partition) -> int:
    """Dimension of the irreducible representation labelled by `p`.

    Exact integer arithmetic: N! * prod_{i<j}(l_i - l_j + j - i) / prod_i (l_i + n - i)!
    """
    rows = p.rows
    n = len(rows)
    num = factorial(p.n)
    for i in range(n):
        for j in range(i + 1, n):
            num *= rows[i] - rows[j] + (j + 1) - (i + 1)
    den = 1
    for i in range(n):
        den *= factorial(rows[i] + n - (i + 1))
    d, rem = divmod(num, den)
    if rem != 0 or d <= 0:
        raise ArithmeticError(f"dimension formula returned non-integer for {p}")
    return d


def conjugate(p: Partition) -> Partition:
    return p.conjugate()


def spin_sector_to_partition(n: int, two_s: int) -> Partition:
    """Orbital partition of N spin-1/2 fermions with total spin 2S = two_s.

    The conjugate (spin-side) diagram has rows ((N+2S)/2, (N-2S)/2).
    """
    if n < 1:
        raise ValueError("need at least one particle")
    if two_s < 0 or two_s > n:
        raise ValueError(f"2S={two_s} out of range for N={n}")
    if (n - two_s) % 2 != 0:
        raise ValueError(f"2S={two_s} and N={n} have mismatched parity")
    top = (n + two_s) // 2
    bottom = (n - two_s) // 2
    spin_side = Partition((top, bottom) if bottom > 0 else (top,))
    return spin_side.conjugate()


def ground_partition(n: int, omega: int) -> Partition:
    """Most symmetric orbital partition allowed with `omega` intrinsic states.

    [omega^nu, N - nu*omega] with nu = floor(N/omega); trailing zero row dropped.
    """
    if n < 1 or omega < 1:
        raise ValueError("N and omega must be positive")
    nu = n // omega
    remainder = n - nu * omega
    rows = [omega] * nu
    if remainder:
        rows.append(remainder)
    return Partition(tuple(rows))


@dataclass(frozen=True)
class BranchChild:
    partition: Partition
    row_removed: int
    weight: Fraction


@dataclass(frozen=True)
class BranchingTable:
    """Children of a partition under removal of one box, with exact weights
    d_child / d_parent summing to 1."""

    parent: Partition
    children: tuple[BranchChild, ...] = field(default_factory=tuple)

    def weight_sum(self) -> Fraction:
        return sum((c.weight for c in self.children), Fraction(0))


def branching(p: Partition) -> BranchingTable:
    if p.n < 2:
        raise ValueError("branching needs N >= 2 (a single box has no child system)")
    d_parent = dimension(p)
    children = []
    for row in p.removable_rows():
        child = p.remove_box(row)
        children.append(
            BranchChild(child, row, Fraction(dimension(child), d_parent))
        )
    table = BranchingTable(p, tuple(children))
    if table.weight_sum() != 1:
        raise ArithmeticError(f"branching weights of {p} do not sum to 1")
    return table


@dataclass(frozen=True)
class SymmetrySector:
    """Permutation/spin sector of a system of identical particles.

    statistics: 'boson' or 'fermion'; orbital: spatial-symmetry partition;
    two_s: 2S for spin-1/2 fermions (None otherwise); omega: number of
    intrinsic states per particle (1 for spinless, 2 for spin-1/2).
    """

    statistics: str
    orbital: Partition
    two_s: int | None = None
    omega: int = 1

    def __post_init__(self):
        if self.statistics not in ("boson", "fermion"):
            raise ValueError(f"unknown statistics {self.statistics!r}")
        if self.omega < 1:
            raise ValueError("omega must be >= 1")
        if self.statistics == "fermion":
            spin_side = self.orbital.conjugate()
            if spin_side.n_rows > self.omega:
                raise ValueError(
                    f"orbital {self.orbital} needs {spin_side.n_rows} intrinsic states, "
                    f"only omega={self.omega} available"
                )
        elif self.omega == 1 and self.orbital.n_rows != 1:
            raise ValueError("spinless bosons must sit in the fully symmetric sector")
        if self.two_s is not None:
            n = self.orbital.n
            expected = spin_sector_to_partition(n, self.two_s)
            if expected != self.orbital:
                raise ValueError(
                    f"orbital {self.orbital} inconsistent with 2S={self.two_s} "
                    f"(expected {expected})"
                )

    @property
    def n(self) -> int:
        return self.orbital.n


def boson_sector(n: int) -> SymmetrySector:
    """Spinless bosons: fully symmetric orbital state."""
    return SymmetrySector("boson", Partition((n,)), None, 1)


def fermion_sector(n: int, two_s: int) -> SymmetrySector:
    """Spin-1/2 fermions with total spin 2S = two_s."""
    return SymmetrySector("fermion", spin_sector_to_partition(n, two_s), two_s, 2)
