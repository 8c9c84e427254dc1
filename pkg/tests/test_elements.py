import math

import numpy as np
import pytest

from fewbound.fewbody.elements import GaussianBasisElement, SectorContext, compute_block
from fewbound.fewbody.solver import antisymmetrized_matrix_elements
from fewbound.fewbody.spin import spin_eigenbasis
from fewbound.potentials import PotentialSpec, PotentialTerm, SystemSpec, potential
from fewbound.symrep import boson_sector, fermion_sector


def scalar_element(alphas, chi):
    return GaussianBasisElement(np.asarray(alphas, dtype=float), "scalar",
                                np.zeros((0, 0)), np.asarray(chi, dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(42)


class TestTwoBody:
    """Analytic checks in the single relative coordinate."""

    def setup_method(self):
        self.system = SystemSpec(2, 1.0, potential("coulomb", -1.0), boson_sector(2), (0, 1))
        self.ctx = SectorContext(self.system, "scalar")

    def test_overlap(self):
        a, b = 0.5, 1.5
        e1, e2 = scalar_element([a], [1.0]), scalar_element([b], [1.0])
        blk = compute_block(self.ctx, [e1], [e2])
        # phi = exp(-alpha r^2); symmetrizer doubles the direct term
        assert blk.s[0, 0] == pytest.approx(2 * (math.pi / (2 * a + 2 * b)) ** 1.5, rel=1e-13)

    def test_kinetic(self):
        a, b = 0.7, 1.1
        blk = compute_block(self.ctx, [scalar_element([a], [1.0])], [scalar_element([b], [1.0])])
        # reduced mass m/2: <T> = 6ab/(m(a+b)) * <S>
        expect = 6 * a * b / (a + b) * (math.pi / (2 * a + 2 * b)) ** 1.5 * 2
        assert blk.t[0, 0] == pytest.approx(expect, rel=1e-13)

    def test_coulomb_potential(self):
        a, b = 0.7, 1.1
        blk = compute_block(self.ctx, [scalar_element([a], [1.0])], [scalar_element([b], [1.0])])
        c = a + b
        expect = 2 * (-1.0) * 4 * math.pi * (c / math.pi) ** 1.5 * (1 / (2 * c)) \
            * (math.pi / (2 * c)) ** 1.5
        assert blk.v[0, 0] == pytest.approx(expect, rel=1e-13)

    def test_vector_family_odd_channel(self):
        # antisymmetric spatial two-body state: swapping flips the sign, so the
        # symmetric (boson) projection of a vector element vanishes
        sys_f = SystemSpec(2, 1.0, potential("harmonic_pair", 1.0), fermion_sector(2, 2), (1, -1))
        ctx = SectorContext(sys_f, "vector")
        chi_t = spin_eigenbasis(2, 2)[:, 0]
        el = GaussianBasisElement(np.array([0.8]), "vector", np.array([[1.0]]), chi_t)
        blk = compute_block(ctx, [el], [el])
        assert blk.s[0, 0] > 0

        sys_b = SystemSpec(2, 1.0, potential("harmonic_pair", 1.0), boson_sector(2), (1, -1))
        ctx_b = SectorContext(sys_b, "vector")
        el_b = GaussianBasisElement(np.array([0.8]), "vector", np.array([[1.0]]), np.ones(1))
        blk_b = compute_block(ctx_b, [el_b], [el_b])
        assert abs(blk_b.s[0, 0]) < 1e-12 * blk_b.s_scale[0, 0]


class TestSymmetryZeros:
    def test_symmetric_width_scalar_cancels_in_antisymmetric_sector(self):
        # a permutation-symmetric scalar Gaussian has no fully antisymmetric
        # component: the 6-term signed sum cancels identically
        system = SystemSpec(3, 1.0, potential("harmonic_pair", 1.0), fermion_sector(3, 3), (0, 1))
        ctx = SectorContext(system, "scalar")
        chi = spin_eigenbasis(3, 3)[:, 0]
        for width in (0.3, 1.0, 4.2):
            el = scalar_element([width, width, width], chi)
            blk = compute_block(ctx, [el], [el])
            assert abs(blk.s[0, 0]) < 1e-13 * blk.s_scale[0, 0]
            assert abs(blk.h[0, 0]) < 1e-11 * blk.s_scale[0, 0]

    def test_generic_width_scalar_projection_is_tiny_but_positive(self):
        # generic widths do retain a small antisymmetric component (the
        # high-lying scalar states of the antisymmetric sector); the projected
        # norm must stay non-negative
        system = SystemSpec(3, 1.0, potential("harmonic_pair", 1.0), fermion_sector(3, 3), (0, 1))
        ctx = SectorContext(system, "scalar")
        chi = spin_eigenbasis(3, 3)[:, 0]
        el = scalar_element([0.5, 1.0, 2.0], chi)
        blk = compute_block(ctx, [el], [el])
        assert blk.s[0, 0] == pytest.approx(1.0788930479e-4, rel=1e-8)
        assert 0 < blk.s[0, 0] < 1e-3 * blk.s_scale[0, 0]


class TestProjectorConsistency:
    @pytest.mark.parametrize("n,sector_fn,family,nv", [
        (3, lambda: fermion_sector(3, 1), "vector", 1),
        (3, lambda: fermion_sector(3, 3), "cross", 2),
        (4, lambda: fermion_sector(4, 4), "triple", 3),
    ])
    def test_double_projection_equals_factorial(self, n, sector_fn, family, nv, rng):
        """<A phi|O|A psi> = N! <phi|O|A psi> (projector idempotence)."""
        system = SystemSpec(n, 1.0, potential("gaussian", -2.0), sector_fn(), (0, 1))
        ctx = SectorContext(system, family)
        basis = spin_eigenbasis(n, sector_fn().two_s)

        def draw():
            alphas = np.exp(rng.uniform(-1.0, 1.0, n * (n - 1) // 2))
            vecs = rng.normal(size=(nv, n - 1))
            chi = basis @ (lambda v: v / np.linalg.norm(v))(rng.normal(size=basis.shape[1]))
            return GaussianBasisElement(alphas, family, vecs, chi)

        bra, ket = draw(), draw()
        single = compute_block(ctx, [bra], [ket])

        # apply the antisymmetrizer to the bra explicitly, term by term
        fact = math.factorial(n)
        fr = ctx.frame
        total_s = 0.0
        total_h = 0.0
        for perm, o_mat, sign in zip(fr.permutations, fr.perm_orthogonal, fr.perm_signs):
            alphas_p = np.empty_like(bra.alphas)
            inv = np.argsort(perm)
            for p_idx, (i, j) in enumerate(fr.pairs):
                alphas_p[p_idx] = bra.alphas[fr.pair_index(inv[i], inv[j])]
            vecs_p = bra.vectors @ o_mat
            from fewbound.fewbody.spin import permutation_index_map
            idx = permutation_index_map(n, perm)
            chi_p = bra.chi[idx]
            bra_p = GaussianBasisElement(alphas_p, family, vecs_p, chi_p)
            blk = compute_block(ctx, [bra_p], [ket])
            weight = sign if ctx.spin.sign < 0 else 1.0
            total_s += weight * blk.s[0, 0]
            total_h += weight * blk.h[0, 0]
        assert total_s == pytest.approx(fact * single.s[0, 0], rel=1e-9, abs=1e-12)
        assert total_h == pytest.approx(fact * single.h[0, 0], rel=1e-9, abs=1e-12)


class TestHermiticityAndFallback:
    def test_block_hermitian_across_permutation_paths(self, rng):
        system = SystemSpec(3, 1.0, potential("yukawa", -8.0), fermion_sector(3, 1), (1, -1))
        ctx = SectorContext(system, "vector")
        basis = spin_eigenbasis(3, 1)

        def draw():
            chi = basis @ (lambda v: v / np.linalg.norm(v))(rng.normal(size=2))
            return GaussianBasisElement(np.exp(rng.uniform(-1, 1, 3)), "vector",
                                        rng.normal(size=(1, 2)), chi)

        els = [draw() for _ in range(4)]
        blk = compute_block(ctx, els, els)
        assert np.allclose(blk.s, blk.s.T, rtol=1e-10, atol=1e-12)
        assert np.allclose(blk.h, blk.h.T, rtol=1e-9, atol=1e-11)

    def test_kernel_matches_numpy_path(self, rng):
        system = SystemSpec(4, 1.0,
                            PotentialSpec((PotentialTerm("yukawa", -6.0),
                                           PotentialTerm("powerlaw", 0.3, q=1.5))),
                            fermion_sector(4, 4), (0, -1))
        ctx = SectorContext(system, "triple")
        basis = spin_eigenbasis(4, 4)

        def draw():
            return GaussianBasisElement(np.exp(rng.uniform(-1, 1, 6)), "triple",
                                        rng.normal(size=(3, 3)), basis[:, 0])

        bras = [draw() for _ in range(3)]
        kets = [draw() for _ in range(2)]
        fast = compute_block(ctx, bras, kets, use_kernel=True)
        slow = compute_block(ctx, bras, kets, use_kernel=False)
        for name in ("s", "t", "v"):
            a, b = getattr(fast, name), getattr(slow, name)
            assert np.allclose(a, b, rtol=1e-12, atol=1e-14 * np.abs(b).max())


def test_antisymmetrized_matrix_elements_entry_point():
    system = SystemSpec(2, 1.0, potential("gaussian", -3.0), boson_sector(2), (0, 1))
    a, b = 0.5, 0.9
    e1, e2 = scalar_element([a], [1.0]), scalar_element([b], [1.0])
    s, t, v = antisymmetrized_matrix_elements(e1, e2, system)
    assert s == pytest.approx(2 * (math.pi / (2 * a + 2 * b)) ** 1.5, rel=1e-12)
    assert t > 0
    assert v < 0
