"""Spin-1/2 product-basis algebra: total-S projection and permutation action.

States live in the full 2^N product basis (N <= 4, so 16 amplitudes at most);
a sector's primitives are confined to the S^2 eigenspace inside the maximal
S_z block.
"""

from __future__ import annotations

import numpy as np

from fewbound.symrep import SymmetrySector


def permutation_index_map(n: int, perm: tuple[int, ...]) -> np.ndarray:
    """Index map realizing (P_sigma chi)[b] = chi[b'] with b'_i = b_{sigma(i)}."""
    dim = 2**n
    out = np.empty(dim, dtype=np.int64)
    for b in range(dim):
        bp = 0
        for i in range(n):
            if (b >> perm[i]) & 1:
                bp |= 1 << i
        out[b] = bp
    return out


def apply_permutation(chi: np.ndarray, index_map: np.ndarray) -> np.ndarray:
    return chi[index_map]


def transposition_matrix(n: int, i: int, j: int) -> np.ndarray:
    perm = list(range(n))
    perm[i], perm[j] = perm[j], perm[i]
    idx = permutation_index_map(n, tuple(perm))
    mat = np.zeros((2**n, 2**n))
    mat[np.arange(2**n), idx] = 1.0
    return mat


def total_s2_matrix(n: int) -> np.ndarray:
    """S^2 = (3N/4 - N(N-1)/4) I + sum_{i<j} P_ij in the product basis."""
    dim = 2**n
    s2 = (3.0 * n / 4.0 - n * (n - 1) / 4.0) * np.eye(dim)
    for i in range(n):
        for j in range(i + 1, n):
            s2 += transposition_matrix(n, i, j)
    return s2


def sz_block_indices(n: int, two_sz: int) -> np.ndarray:
    dim = 2**n
    two_sz_of = np.array([2 * bin(b).count("1") - n for b in range(dim)])
    return np.nonzero(two_sz_of == two_sz)[0]


def spin_eigenbasis(n: int, two_s: int, two_sz: int | None = None) -> np.ndarray:
    """Orthonormal basis (columns, embedded in 2^N) of the total-spin-S
    eigenspace within the S_z = two_sz/2 block (defaults to S_z = S)."""
    if two_sz is None:
        two_sz = two_s
    idx = sz_block_indices(n, two_sz)
    if idx.size == 0:
        raise ValueError(f"empty S_z block 2Sz={two_sz} for N={n}")
    s2 = total_s2_matrix(n)[np.ix_(idx, idx)]
    vals, vecs = np.linalg.eigh(s2)
    target = two_s / 2.0 * (two_s / 2.0 + 1.0)
    sel = np.nonzero(np.abs(vals - target) < 1e-9)[0]
    if sel.size == 0:
        raise ValueError(f"no S={two_s}/2 states in the 2Sz={two_sz} block of N={n}")
    basis = np.zeros((2**n, sel.size))
    basis[idx, :] = vecs[:, sel]
    return basis


class SpinSpace:
    """Per-sector spin data: eigenbasis, permutation maps, statistics sign."""

    def __init__(self, sector: SymmetrySector, perms: list[tuple[int, ...]]):
        self.sector = sector
        n = sector.n
        if sector.omega == 1:
            # spinless: trivial one-dimensional intrinsic space
            self.dim = 1
            self.basis = np.ones((1, 1))
            self.perm_maps = [np.zeros(1, dtype=np.int64) for _ in perms]
        else:
            if sector.omega != 2 or sector.two_s is None:
                raise ValueError("only spin-1/2 intrinsic structure is supported")
            self.basis = spin_eigenbasis(n, sector.two_s)
            self.dim = self.basis.shape[1]
            self.perm_maps = [permutation_index_map(n, p) for p in perms]
        self.sign = -1.0 if sector.statistics == "fermion" else 1.0

    def random_primitive(self, rng: np.random.Generator) -> np.ndarray:
        """Unit vector in the S eigenspace (full 2^N embedding)."""
        coeff = rng.normal(size=self.dim)
        coeff /= np.linalg.norm(coeff)
        return self.basis @ coeff

    def permutation_overlaps(self, chi_bra: np.ndarray, chi_ket: np.ndarray) -> np.ndarray:
        """<chi_bra | P_sigma | chi_ket> for every permutation, in order."""
        return np.array(
            [chi_bra @ chi_ket[idx] for idx in self.perm_maps]
        )
