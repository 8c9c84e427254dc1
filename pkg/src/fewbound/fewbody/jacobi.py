"""Mass-scaled Jacobi coordinates for N equal-mass particles and the induced
orthogonal action of particle permutations.

Conventions: x = U r with U the (N-1) x N matrix whose rows are orthonormal
and orthogonal to the uniform vector, so the internal kinetic energy is
sum_k pi_k^2 / (2m) and r_ij = |w_ij^T x| with |w_ij|^2 = 2.
"""

from __future__ import annotations

from itertools import permutations
from math import sqrt

import numpy as np


def jacobi_matrix(n: int) -> np.ndarray:
    """Rows k = 1..N-1: (r_1 + ... + r_k - k r_{k+1}) / sqrt(k(k+1))."""
    u = np.zeros((n - 1, n))
    for k in range(1, n):
        u[k - 1, :k] = 1.0 / sqrt(k * (k + 1))
        u[k - 1, k] = -k / sqrt(k * (k + 1))
    return u


class JacobiFrame:
    """Geometry shared by every matrix element of an N-particle system."""

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("need at least two particles")
        self.n = n
        self.u = jacobi_matrix(n)
        self.pairs: list[tuple[int, int]] = [
            (i, j) for i in range(n) for j in range(i + 1, n)
        ]
        # w_ij = column i - column j of U, so r_i - r_j = sum_k w_k x_k
        self.pair_vectors = np.stack(
            [self.u[:, i] - self.u[:, j] for (i, j) in self.pairs]
        )
        perms = list(permutations(range(n)))
        self.permutations = perms
        self.perm_signs = np.array([_parity(p) for p in perms], dtype=float)
        # O_sigma = U S_sigma U^T with (S_sigma)_{ij} = delta_{j, sigma(i)}
        mats = []
        for p in perms:
            s = np.zeros((n, n))
            for i, pi in enumerate(p):
                s[i, pi] = 1.0
            mats.append(self.u @ s @ self.u.T)
        self.perm_orthogonal = np.stack(mats)

    def pair_index(self, i: int, j: int) -> int:
        return self.pairs.index((min(i, j), max(i, j)))

    def widths_matrix(self, alphas: np.ndarray) -> np.ndarray:
        """A = sum_{i<j} alpha_ij w_ij w_ij^T (quadratic form of the Gaussian)."""
        w = self.pair_vectors
        return np.einsum("p,pk,pl->kl", alphas, w, w)


def _parity(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


_FRAMES: dict[int, JacobiFrame] = {}


def frame(n: int) -> JacobiFrame:
    if n not in _FRAMES:
        _FRAMES[n] = JacobiFrame(n)
    return _FRAMES[n]
