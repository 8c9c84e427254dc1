from fractions import Fraction
from math import factorial

import pytest

from fewbound.symrep import (
    Partition,
    SymmetrySector,
    boson_sector,
    branching,
    dimension,
    fermion_sector,
    ground_partition,
    partition,
    spin_sector_to_partition,
)


def all_partitions(n: int, max_first: int | None = None):
    """Enumerate partitions of n (largest row first)."""
    if max_first is None:
        max_first = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_first), 0, -1):
        for rest in all_partitions(n - first, first):
            yield (first,) + rest


def count_standard_tableaux(shape: tuple[int, ...]) -> int:
    """Brute-force oracle: count standard fillings by recursive box placement."""

    def rec(filled_per_row: tuple[int, ...]) -> int:
        if sum(filled_per_row) == sum(shape):
            return 1
        total = 0
        for i, filled in enumerate(filled_per_row):
            if filled < shape[i] and (i == 0 or filled_per_row[i - 1] > filled):
                nxt = list(filled_per_row)
                nxt[i] += 1
                total += rec(tuple(nxt))
        return total

    return rec(tuple(0 for _ in shape))


class TestPartition:
    def test_invalid_rows_rejected(self):
        with pytest.raises(ValueError):
            Partition((1, 2))
        with pytest.raises(ValueError):
            Partition((2, 0))
        with pytest.raises(ValueError):
            Partition(())

    def test_large_n_rejected(self):
        with pytest.raises(ValueError):
            Partition((21,))

    @pytest.mark.parametrize(
        "rows,expected",
        [((3,), (1, 1, 1)), ((2, 1), (2, 1)), ((2, 2), (2, 2)), ((4, 2, 1), (3, 2, 1, 1))],
    )
    def test_conjugate(self, rows, expected):
        assert partition(*rows).conjugate() == partition(*expected)

    def test_conjugate_is_involution(self):
        for n in range(1, 11):
            for rows in all_partitions(n):
                p = Partition(rows)
                assert p.conjugate().conjugate() == p


class TestDimension:
    @pytest.mark.parametrize(
        "rows,expected",
        [((2, 1), 2), ((1, 1, 1), 1), ((2, 2), 2), ((3, 1), 3), ((4,), 1)],
    )
    def test_known_values(self, rows, expected):
        assert dimension(partition(*rows)) == expected

    def test_matches_tableau_count(self):
        for n in range(1, 9):
            for rows in all_partitions(n):
                assert dimension(Partition(rows)) == count_standard_tableaux(rows)

    def test_burnside_identity(self):
        for n in range(1, 9):
            total = sum(dimension(Partition(rows)) ** 2 for rows in all_partitions(n))
            assert total == factorial(n)


class TestSpinSector:
    @pytest.mark.parametrize(
        "n,two_s,expected",
        [(3, 1, (2, 1)), (3, 3, (1, 1, 1)), (4, 0, (2, 2)), (4, 4, (1, 1, 1, 1)), (2, 0, (2,))],
    )
    def test_known_values(self, n, two_s, expected):
        assert spin_sector_to_partition(n, two_s) == partition(*expected)

    def test_parity_mismatch_raises(self):
        with pytest.raises(ValueError):
            spin_sector_to_partition(3, 2)
        with pytest.raises(ValueError):
            spin_sector_to_partition(4, 5)

    def test_conjugate_rows_encode_spin(self):
        for n in range(1, 11):
            for two_s in range(n % 2, n + 1, 2):
                bar = spin_sector_to_partition(n, two_s).conjugate()
                rows = bar.rows + (0,) * (2 - bar.n_rows)
                assert rows[0] + rows[1] == n
                assert rows[0] - rows[1] == two_s
                assert bar.n_rows <= 2


class TestGroundPartition:
    @pytest.mark.parametrize(
        "n,omega,expected",
        [(4, 2, (2, 2)), (5, 2, (2, 2, 1)), (3, 4, (3,)), (4, 1, (1, 1, 1, 1))],
    )
    def test_known_values(self, n, omega, expected):
        assert ground_partition(n, omega) == partition(*expected)

    def test_matches_lowest_spin_sector(self):
        for n in range(1, 11):
            assert ground_partition(n, 2) == spin_sector_to_partition(n, n % 2)


class TestBranching:
    def test_mixed_symmetry_example(self):
        table = branching(partition(2, 1))
        got = {(c.partition.rows, c.row_removed): c.weight for c in table.children}
        assert got == {((2,), 2): Fraction(1, 2), ((1, 1), 1): Fraction(1, 2)}

    def test_antisymmetric_single_child(self):
        table = branching(partition(1, 1, 1))
        assert len(table.children) == 1
        child = table.children[0]
        assert child.partition == partition(1, 1)
        assert child.row_removed == 3
        assert child.weight == 1

    def test_two_by_two(self):
        table = branching(partition(2, 2))
        assert len(table.children) == 1
        assert table.children[0].partition == partition(2, 1)
        assert table.children[0].weight == 1

    def test_weights_sum_to_one_exactly(self):
        for n in range(2, 11):
            for rows in all_partitions(n):
                table = branching(Partition(rows))
                assert table.weight_sum() == 1
                assert all(c.weight > 0 for c in table.children)

    def test_single_box_rejected(self):
        with pytest.raises(ValueError):
            branching(partition(1))


class TestSymmetrySector:
    def test_fermion_needs_enough_intrinsic_states(self):
        with pytest.raises(ValueError):
            SymmetrySector("fermion", partition(3), omega=2)  # conj has 3 rows
        SymmetrySector("fermion", partition(2, 1), omega=2)

    def test_boson_spinless_must_be_symmetric(self):
        with pytest.raises(ValueError):
            SymmetrySector("boson", partition(2, 1), omega=1)
        assert boson_sector(3).orbital == partition(3)

    def test_fermion_sector_helper(self):
        sec = fermion_sector(3, 1)
        assert sec.orbital == partition(2, 1)
        assert sec.omega == 2 and sec.two_s == 1

    def test_inconsistent_spin_orbital_pair(self):
        with pytest.raises(ValueError):
            SymmetrySector("fermion", partition(2, 1), two_s=3, omega=2)
