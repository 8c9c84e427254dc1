import math

import pytest

from fewbound.fewbody import SolverConfig, harmonic_exact_energy, pair_length_scale, solve
from fewbound.potentials import SCAN, SystemSpec, potential
from fewbound.symrep import boson_sector, fermion_sector, partition

QUICK = SolverConfig(basis_cap=40, k_candidates=20, refine_sweeps=1, seed=9)


class TestHarmonicOracle:
    @pytest.mark.parametrize("n,rows,expect_unit_g", [
        (2, (2,), 3.0),                      # 3 sqrt(g/m) = 1.5 sqrt(4g)
        (3, (1, 1, 1), 5 * math.sqrt(6.0)),
        (4, (1, 1, 1, 1), 7.5 * math.sqrt(8.0)),
        (3, (2, 1), 4 * math.sqrt(6.0)),
    ])
    def test_reference_values(self, n, rows, expect_unit_g):
        assert harmonic_exact_energy(n, partition(*rows), 1.0, 1.0) == pytest.approx(
            expect_unit_g, rel=1e-12
        )

    def test_two_body_scaling(self):
        g, m = 2.3, 1.7
        assert harmonic_exact_energy(2, partition(2), g, m) == pytest.approx(
            3 * math.sqrt(g / m), rel=1e-12
        )

    def test_unknown_partition_rejected(self):
        with pytest.raises(ValueError):
            harmonic_exact_energy(4, partition(3, 1, 1, 1), 1.0, 1.0)  # wrong N
        with pytest.raises(ValueError):
            harmonic_exact_energy(5, partition(3, 2), 1.0, 1.0)


class TestSolveBasics:
    def test_hydrogen_like_two_body(self):
        res = solve(
            SystemSpec(2, 1.0, potential("coulomb", -1.0), boson_sector(2), (0, 1)),
            SolverConfig(basis_cap=70, k_candidates=30, refine_sweeps=3, seed=7),
        )
        assert res.energy == pytest.approx(-0.25, rel=1e-6)

    def test_trace_monotone_and_final(self):
        res = solve(
            SystemSpec(3, 1.0, potential("yukawa", -8.0), fermion_sector(3, 1), (1, -1)),
            QUICK,
        )
        energies = [e for _, e in res.trace]
        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))
        assert res.energy == energies[-1]

    def test_determinism_bit_identical(self):
        spec = SystemSpec(3, 1.0, potential("gaussian", -10.0), fermion_sector(3, 1), (1, -1))
        res1 = solve(spec, QUICK)
        res2 = solve(spec, QUICK)
        assert res1.trace == res2.trace
        assert res1.energy == res2.energy

    def test_seed_changes_path_not_physics(self):
        spec = SystemSpec(3, 1.0, potential("gaussian", -10.0), boson_sector(3), (0, 1))
        cfg_a = SolverConfig(basis_cap=40, k_candidates=20, refine_sweeps=1, seed=1)
        cfg_b = SolverConfig(basis_cap=40, k_candidates=20, refine_sweeps=1, seed=2)
        e_a = solve(spec, cfg_a).energy
        e_b = solve(spec, cfg_b).energy
        assert e_a == pytest.approx(e_b, rel=2e-4)

    def test_scan_finds_ground_sector(self):
        res = solve(
            SystemSpec(3, 1.0, potential("harmonic_pair", 1.0), fermion_sector(3, 1), SCAN),
            SolverConfig(basis_cap=40, k_candidates=20, refine_sweeps=1, seed=5),
        )
        assert res.angular == (1, -1)
        assert res.energy == pytest.approx(4 * math.sqrt(6.0), rel=1e-5)


class TestSectorOrthogonality:
    def test_antisymmetric_scalar_costs_more_quanta(self):
        # forced [1^3] 0^+ must sit strictly above the [1^3] 1^+ ground state
        cfg = SolverConfig(basis_cap=50, k_candidates=25, refine_sweeps=1, seed=3)
        low = solve(
            SystemSpec(3, 1.0, potential("harmonic_pair", 1.0), fermion_sector(3, 3), (1, 1)),
            cfg,
        )
        high = solve(
            SystemSpec(3, 1.0, potential("harmonic_pair", 1.0), fermion_sector(3, 3), (0, 1)),
            cfg,
        )
        assert high.energy > low.energy * 1.2
        # 0^+ antisymmetric needs 6 oscillator quanta: E = (6 + 3) sqrt(6)
        assert high.energy >= (6 + 3) * math.sqrt(6.0) * (1 - 1e-6)


class TestScalingLaw:
    @pytest.mark.parametrize("alpha", [0.5, 1.37, 2.0])
    def test_mass_coupling_identity(self, alpha):
        # E(alpha m, g) = E(m, alpha g) / alpha
        g, m = 9.0, 1.0
        cfg = SolverConfig(basis_cap=45, k_candidates=22, refine_sweeps=2, seed=13)
        direct = solve(
            SystemSpec(3, alpha * m, potential("gaussian", -g), boson_sector(3), (0, 1)), cfg
        ).energy
        scaled = solve(
            SystemSpec(3, m, potential("gaussian", -alpha * g), boson_sector(3), (0, 1)), cfg
        ).energy / alpha
        assert direct == pytest.approx(scaled, rel=2e-5)


class TestUnboundReporting:
    def test_subcritical_sector_reports_threshold(self):
        # yukawa g=-8: the l=1 two-body channel binds, but spin-aligned N=3 at
        # a weak coupling does not
        res = solve(
            SystemSpec(3, 1.0, potential("yukawa", -2.0), fermion_sector(3, 3), (1, 1)),
            SolverConfig(basis_cap=30, k_candidates=15, refine_sweeps=0, seed=1,
                         threshold=0.0),
        )
        assert res.unbound
        assert res.threshold == 0.0

    def test_bound_state_not_flagged(self):
        res = solve(
            SystemSpec(3, 1.0, potential("yukawa", -8.0), fermion_sector(3, 1), (1, -1)),
            SolverConfig(basis_cap=40, k_candidates=20, refine_sweeps=1, seed=1,
                         threshold=0.0),
        )
        assert not res.unbound


def test_pair_length_scale_matches_oscillator():
    # two-body harmonic: <r^2> = 3/(2 sqrt(mu k2)) ... computed against the
    # analytic gaussian ground state of the relative motion
    g, m = 1.0, 1.0
    mu = m / 2
    omega = math.sqrt(2 * g / mu)
    expect = math.sqrt(1.5 / (mu * omega))
    got = pair_length_scale(SystemSpec(2, m, potential("harmonic_pair", g), boson_sector(2), (0, 1)))
    assert got == pytest.approx(expect, rel=1e-6)
