import numpy as np
import pytest

from fewbound.fewbody.jacobi import JacobiFrame, frame


@pytest.mark.parametrize("n", [2, 3, 4])
class TestJacobiFrame:
    def test_rows_orthonormal_and_translation_free(self, n):
        fr = JacobiFrame(n)
        assert np.allclose(fr.u @ fr.u.T, np.eye(n - 1), atol=1e-14)
        assert np.allclose(fr.u @ np.ones(n), 0.0, atol=1e-14)

    def test_pair_vectors_have_norm_sqrt2(self, n):
        fr = JacobiFrame(n)
        assert np.allclose(np.sum(fr.pair_vectors**2, axis=1), 2.0, atol=1e-14)

    def test_pair_sum_is_n_times_identity(self, n):
        # sum_{i<j} w w^T = N I  <=>  sum r_ij^2 = N sum x_k^2
        fr = JacobiFrame(n)
        total = sum(np.outer(w, w) for w in fr.pair_vectors)
        assert np.allclose(total, n * np.eye(n - 1), atol=1e-13)

    def test_permutation_matrices_orthogonal(self, n):
        fr = JacobiFrame(n)
        for o in fr.perm_orthogonal:
            assert np.allclose(o @ o.T, np.eye(n - 1), atol=1e-13)

    def test_permutation_representation_property(self, n):
        fr = JacobiFrame(n)
        perms = fr.permutations
        by_perm = {p: o for p, o in zip(perms, fr.perm_orthogonal)}
        rng = np.random.default_rng(0)
        for _ in range(6):
            p1 = perms[rng.integers(len(perms))]
            p2 = perms[rng.integers(len(perms))]
            comp = tuple(p1[p2[i]] for i in range(n))
            assert np.allclose(by_perm[comp], by_perm[p2] @ by_perm[p1], atol=1e-13) or \
                np.allclose(by_perm[comp], by_perm[p1] @ by_perm[p2], atol=1e-13)

    def test_pair_distances_recovered(self, n):
        fr = JacobiFrame(n)
        rng = np.random.default_rng(1)
        r = rng.normal(size=(n, 3))
        x = fr.u @ r
        for (i, j), w in zip(fr.pairs, fr.pair_vectors):
            direct = np.linalg.norm(r[i] - r[j])
            via_jacobi = np.linalg.norm(w @ x)
            assert direct == pytest.approx(via_jacobi, rel=1e-12)

    def test_permutation_action_matches_relabeling(self, n):
        fr = JacobiFrame(n)
        rng = np.random.default_rng(2)
        r = rng.normal(size=(n, 3))
        x = fr.u @ r
        for perm, o in zip(fr.permutations, fr.perm_orthogonal):
            r_perm = r[list(perm)]  # configuration with particle i at r_{perm(i)}
            assert np.allclose(fr.u @ r_perm, o @ x, atol=1e-12)


def test_frame_cache_returns_same_object():
    assert frame(3) is frame(3)
