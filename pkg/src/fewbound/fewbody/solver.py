"""Variational ground-state solver: correlated-Gaussian basis grown by
stochastic candidate selection, refined in place, solved as a generalized
symmetric eigenproblem with an overlap condition guard."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import sqrt

import numpy as np
import scipy.linalg as sla

from fewbound.fewbody.elements import (
    ANGULAR_FAMILY,
    FAMILY_ANGULAR,
    Block,
    GaussianBasisElement,
    SectorContext,
    compute_block,
)
from fewbound.fewbody.wick import FAMILY_VECTORS
from fewbound.onebody import radial_spectrum, radial_wavefunction
from fewbound.potentials import SCAN, SystemSpec
from fewbound.symrep import Partition, SymmetrySector

PIVOT_GUARD = 1e-10
# minimum surviving fraction of the |permutation-term| sum: elements whose
# (anti)symmetrization cancels more than this are too inaccurate to keep
CANCEL_GUARD = 1e-8
# target relative accuracy protected by the adaptive conditioning floor
COLLAPSE_TOL = 1e-6
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SolverConfig:
    k_candidates: int = 30
    refine_sweeps: int = 2
    refine_candidates: int = 12
    basis_cap: int | None = None  # default 100 (N<=3) / 400 (N=4)
    seed: int = 20260810
    stop_rel: float = 1e-7
    patience: int = 30
    min_basis: int = 12
    alpha_lo: float = 1e-3
    alpha_hi: float = 1e3
    length_scale: float | None = None  # overrides the 2-body size estimate
    threshold: float | None = None  # breakup energy; None disables detection

    def cap_for(self, n: int) -> int:
        if self.basis_cap is not None:
            return self.basis_cap
        return 400 if n == 4 else 100


@dataclass(frozen=True)
class SolveResult:
    energy: float
    basis_size: int
    sector: SymmetrySector
    angular: tuple[int, int]
    trace: tuple[tuple[int, float], ...]
    seed: int
    family: str
    unbound: bool = False
    threshold: float | None = None

    def trace_csv(self) -> str:
        lines = ["basis_size,energy"]
        lines += [f"{size},{energy:.12g}" for size, energy in self.trace]
        return "\n".join(lines) + "\n"


HARMONIC_QUANTA: dict[tuple[int, ...], int] = {
    (1, 1): 1,
    (2, 1): 1,
    (3, 1): 1,
    (1, 1, 1): 2,
    (2, 2): 2,
    (2, 1, 1): 2,
    (1, 1, 1, 1): 3,
}


def harmonic_exact_energy(n: int, orbital: Partition, g: float, m: float) -> float:
    """Exact internal ground energy for the pure pair-harmonic interaction
    g * sum r_ij^2 in the given orbital-symmetry sector."""
    if g <= 0 or m <= 0:
        raise ValueError("need g > 0 and m > 0")
    if orbital.n != n:
        raise ValueError(f"partition {orbital} is not a partition of N={n}")
    if orbital.n_rows == 1:
        quanta = 0
    elif orbital.rows in HARMONIC_QUANTA:
        quanta = HARMONIC_QUANTA[orbital.rows]
    else:
        raise ValueError(f"no minimal-quanta entry for {orbital}")
    return (quanta + 1.5 * (n - 1)) * sqrt(2.0 * n * g / m)


def pair_length_scale(system: SystemSpec) -> float:
    """rms pair distance of the two-body internal ground state; falls back to
    the potential range when nothing binds."""
    mu = system.mass / 2.0
    try:
        levels = radial_spectrum(system.potential, mu, 0, 1)
    except (ValueError, RuntimeError):
        levels = []
    if not levels:
        return max(t.range_scale for t in system.potential.terms)
    r, u = radial_wavefunction(system.potential, mu, 0, levels[0].energy)
    u2 = u * u
    norm = np.trapezoid(u2, r)
    return float(np.sqrt(np.trapezoid(u2 * r * r, r) / norm))


def _families_for(system: SystemSpec) -> list[str]:
    fams = ["scalar"]
    if system.n >= 2:
        fams.append("vector")
    if system.n >= 3:
        fams.append("cross")
    if system.n >= 4:
        fams.append("triple")
    return fams


class _Basis:
    """Growing normalized sector matrices."""

    def __init__(self, cap: int):
        self.s = np.zeros((cap, cap))
        self.h = np.zeros((cap, cap))
        self.elements: list[GaussianBasisElement] = []
        self.norms: list[float] = []
        # worst normalized permutation-cancellation magnitude accepted so far;
        # sets how well-conditioned the overlap must stay to keep the rounding
        # error of the summed elements out of the ground energy
        self.cancel_gauge: float = 1.0

    def pivot_floor(self) -> float:
        m = max(self.size, 1)
        return max(PIVOT_GUARD, _EPS * self.cancel_gauge * m / COLLAPSE_TOL)

    @property
    def size(self) -> int:
        return len(self.elements)

    def append(self, element, norm, s_row, h_row, s_dd, h_dd):
        m = self.size
        self.s[m, :m] = self.s[:m, m] = s_row
        self.h[m, :m] = self.h[:m, m] = h_row
        self.s[m, m] = s_dd
        self.h[m, m] = h_dd
        self.elements.append(element)
        self.norms.append(norm)

    def replace(self, i, element, norm, s_full_row, h_full_row):
        """Row/column i replaced; the full rows include the diagonal entry."""
        m = self.size
        self.s[i, :m] = self.s[:m, i] = s_full_row
        self.h[i, :m] = self.h[:m, i] = h_full_row
        self.elements[i] = element
        self.norms[i] = norm

    def matrices(self):
        m = self.size
        return self.s[:m, :m], self.h[:m, :m]


def _ground_energy(s: np.ndarray, h: np.ndarray) -> float:
    return float(sla.eigh(h, s, eigvals_only=True, subset_by_index=[0, 0])[0])


def _pivots_ok(s_mat: np.ndarray, floor: float = PIVOT_GUARD) -> bool:
    """Overlap factorization guard: smallest Cholesky pivot at least `floor`
    of the largest, plus an eigenvalue back-stop against pivot-ordering blind
    spots."""
    try:
        chol = np.linalg.cholesky(s_mat)
    except np.linalg.LinAlgError:
        return False
    piv = np.diag(chol) ** 2
    if piv.min() < floor * piv.max():
        return False
    eigs = np.linalg.eigvalsh(s_mat)
    return bool(eigs[0] >= 0.1 * floor * eigs[-1])


def spectral_floor(system: SystemSpec) -> float | None:
    """Rigorous lower bound on the internal spectrum when every pair term is
    bounded below: T >= 0 and V >= n_pairs * sum_t inf V_t."""
    total = 0.0
    for t in system.potential.terms:
        if t.kind in ("powerlaw", "harmonic_pair"):
            inf_v = 0.0 if t.coupling > 0 else -np.inf
        elif t.kind in ("gaussian", "exponential"):
            inf_v = min(t.coupling, 0.0)
        else:  # coulomb / yukawa: singular when attractive
            inf_v = 0.0 if t.coupling > 0 else -np.inf
        total += inf_v
    if not np.isfinite(total):
        return None
    n_pairs = system.n * (system.n - 1) // 2
    return n_pairs * total


def _bordered_ground(eps, w_modes, s_row, h_row, h_dd, eps0, floor=PIVOT_GUARD):
    """Lowest eigenvalue after bordering an eigendecomposed problem with a
    normalized candidate; returns None if the candidate is numerically
    dependent (overlap pivot below guard)."""
    s_t = w_modes.T @ s_row
    h_t = w_modes.T @ h_row
    resid = 1.0 - s_t @ s_t
    if resid < floor:
        return None
    b = (h_t - eps * s_t) / sqrt(resid)
    h_nn = (h_dd - 2.0 * (s_t @ h_t) + (s_t * s_t) @ eps) / resid

    span = max(float(eps[-1] - eps[0]), abs(h_nn - eps0), 1.0)
    scale = max(abs(eps0), abs(h_nn), 1.0)
    hi = eps0 - 1e-13 * scale

    def f(e):
        return (h_nn - e) - np.sum(b * b / (eps - e))

    if f(hi) >= 0.0:
        return eps0  # no root strictly below the current ground state
    lo = eps0 - span
    for _ in range(80):
        if f(lo) > 0.0:
            break
        lo = eps0 - 2.0 * (eps0 - lo)
    else:
        return None
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class _Sampler:
    """Log-uniform pair widths over the scale-adapted window, mixed between
    fully independent, correlated (shared center, small spread), and isotropic
    draws; refinement can also mutate an existing element."""

    def __init__(self, ctx: SectorContext, config: SolverConfig, scale: float,
                 rng: np.random.Generator):
        self.ctx = ctx
        self.rng = rng
        self.log_lo = np.log(config.alpha_lo / scale**2)
        self.log_hi = np.log(config.alpha_hi / scale**2)
        self.n_pairs = len(ctx.frame.pairs)
        self.nv = FAMILY_VECTORS[ctx.family]

    def _alphas(self) -> np.ndarray:
        mode = self.rng.uniform()
        if mode < 0.25:
            return np.full(self.n_pairs, np.exp(self.rng.uniform(self.log_lo, self.log_hi)))
        if mode < 0.65:
            center = self.rng.uniform(self.log_lo, self.log_hi)
            spread = self.rng.uniform(0.0, 1.5)
            logs = center + spread * self.rng.normal(size=self.n_pairs)
            return np.exp(np.clip(logs, self.log_lo - 2.0, self.log_hi + 2.0))
        return np.exp(self.rng.uniform(self.log_lo, self.log_hi, self.n_pairs))

    def _vectors(self, base: np.ndarray | None) -> np.ndarray:
        # when the prefactor uses every Jacobi vector (cross with n=2, triple
        # with n=3) any independent set is the identity frame up to an overall
        # scale, so sampling would only add noise
        if self.nv == 0:
            return np.zeros((0, 0))
        if self.nv == self.ctx.n_jacobi:
            return np.eye(self.nv)
        if base is not None:
            return base + 0.3 * self.rng.normal(size=(self.nv, self.ctx.n_jacobi))
        return self.rng.normal(size=(self.nv, self.ctx.n_jacobi))

    def draw(self, base: GaussianBasisElement | None = None) -> GaussianBasisElement:
        if base is not None and self.rng.uniform() < 0.5:
            logs = np.log(base.alphas) + 0.35 * self.rng.normal(size=self.n_pairs)
            alphas = np.exp(np.clip(logs, self.log_lo - 2.0, self.log_hi + 2.0))
            vectors = self._vectors(base.vectors if self.nv else None)
        else:
            alphas = self._alphas()
            vectors = self._vectors(None)
        chi = self.ctx.spin.random_primitive(self.rng)
        return GaussianBasisElement(alphas, self.ctx.family, vectors, chi)


def _candidate_rows(ctx, basis: _Basis, candidates):
    """Normalized rows/diagonals of each candidate against the current basis;
    entries are None for symmetry-killed candidates.  The last tuple entry is
    the candidate's normalized cancellation gauge."""
    diag = compute_block(ctx, candidates, candidates)
    out = []
    m = basis.size
    if m:
        row_block = compute_block(ctx, basis.elements, candidates)
    for idx in range(len(candidates)):
        s_dd = diag.s[idx, idx]
        h_dd = diag.h[idx, idx]
        scale = diag.s_scale[idx, idx]
        if not np.isfinite(s_dd) or s_dd <= CANCEL_GUARD * scale:
            out.append(None)
            continue
        norm = 1.0 / sqrt(s_dd)
        gauge = scale * norm * norm
        if m:
            other_norms = np.array(basis.norms)
            s_row = row_block.s[:, idx] * norm * other_norms
            h_row = row_block.h[:, idx] * norm * other_norms
            gauge = max(gauge, float(np.max(row_block.s_scale[:, idx] * norm * other_norms)))
        else:
            s_row = np.zeros(0)
            h_row = np.zeros(0)
        out.append((norm, s_row, h_row, 1.0, h_dd * norm * norm, gauge))
    return out


def solve(system: SystemSpec, config: SolverConfig | None = None) -> SolveResult:
    """Variational upper bound on the internal ground energy in the requested
    sector; deterministic for a fixed seed."""
    config = config or SolverConfig()
    if system.angular == SCAN:
        return _solve_scan(system, config)
    family = ANGULAR_FAMILY.get(system.angular)
    if family is None:
        raise ValueError(f"angular sector {system.angular} not representable")
    return _solve_sector(system, family, config)


def _solve_scan(system: SystemSpec, config: SolverConfig) -> SolveResult:
    probe_cfg = replace(
        config,
        basis_cap=min(18, config.cap_for(system.n)),
        k_candidates=max(8, config.k_candidates // 3),
        refine_sweeps=0,
        patience=60,
    )
    results = []
    for family in _families_for(system):
        sub = SystemSpec(system.n, system.mass, system.potential, system.sector,
                         FAMILY_ANGULAR[family])
        try:
            results.append(_solve_sector(sub, family, probe_cfg))
        except ValueError:
            continue
    if not results:
        raise RuntimeError("no representable angular sector produced a state")
    best = min(results, key=lambda r: r.energy)
    sub = SystemSpec(system.n, system.mass, system.potential, system.sector,
                     best.angular)
    return _solve_sector(sub, best.family, config)


def _solve_sector(system: SystemSpec, family: str, config: SolverConfig) -> SolveResult:
    ctx = SectorContext(system, family)
    rng = np.random.default_rng(config.seed)
    scale = config.length_scale or pair_length_scale(system)
    sampler = _Sampler(ctx, config, scale, rng)
    cap = config.cap_for(system.n)
    basis = _Basis(cap)
    trace: list[tuple[int, float]] = []
    floor = spectral_floor(system)

    misses = 0
    while basis.size < cap and misses < 8:
        m = basis.size
        if m:
            s_cur, h_cur = basis.matrices()
            eps, w_modes = sla.eigh(h_cur, s_cur)
            eps0 = eps[0]
        candidates = [sampler.draw() for _ in range(config.k_candidates)]
        rows = _candidate_rows(ctx, basis, candidates)
        piv_floor = basis.pivot_floor()
        scored = []
        for idx, row in enumerate(rows):
            if row is None:
                continue
            norm, s_row, h_row, s_dd, h_dd, gauge = row
            if m == 0:
                energy = h_dd
            else:
                energy = _bordered_ground(eps, w_modes, s_row, h_row, h_dd, eps0,
                                          piv_floor)
                if energy is None:
                    continue
            if floor is not None and energy < floor - 1e-7 * max(abs(floor), 1.0):
                continue  # below a rigorous spectral floor: numerically bogus
            scored.append((energy, idx))
        scored.sort(key=lambda pair: (pair[0], pair[1]))
        current = trace[-1][1] if trace else np.inf
        accepted = False
        for energy, idx in scored:
            if energy >= current:
                break
            norm, s_row, h_row, s_dd, h_dd, gauge = rows[idx]
            trial = np.empty((m + 1, m + 1))
            trial[:m, :m] = basis.s[:m, :m]
            trial[m, :m] = trial[:m, m] = s_row
            trial[m, m] = s_dd
            if not _pivots_ok(trial, piv_floor):
                continue
            basis.append(candidates[idx], norm, s_row, h_row, s_dd, h_dd)
            basis.cancel_gauge = max(basis.cancel_gauge, gauge)
            accepted = True
            break
        if not accepted:
            misses += 1
            continue
        misses = 0
        energy = _ground_energy(*basis.matrices())
        trace.append((basis.size, energy))
        if _plateaued(trace, config):
            break

    for _ in range(config.refine_sweeps):
        improved = _refine_sweep(ctx, basis, sampler, config, floor)
        trace.append((basis.size, _ground_energy(*basis.matrices())))
        if not improved:
            break

    energy = trace[-1][1]
    unbound = False
    if config.threshold is not None:
        margin = 1e-6 * max(abs(config.threshold), 1.0)
        unbound = energy >= config.threshold - margin
    return SolveResult(
        energy=energy,
        basis_size=basis.size,
        sector=system.sector,
        angular=FAMILY_ANGULAR[family],
        trace=tuple(trace),
        seed=config.seed,
        family=family,
        unbound=unbound,
        threshold=config.threshold,
    )


def _plateaued(trace, config) -> bool:
    if len(trace) < max(config.min_basis, config.patience + 1):
        return False
    e_old = trace[-1 - config.patience][1]
    e_new = trace[-1][1]
    return (e_old - e_new) < config.stop_rel * max(abs(e_new), 1e-300)


def _refine_sweep(ctx, basis: _Basis, sampler: _Sampler, config, floor) -> bool:
    m = basis.size
    if m < 2:
        return False
    improved = False
    for i in range(m):
        keep = [j for j in range(m) if j != i]
        s_cur, h_cur = basis.matrices()
        s_sub = s_cur[np.ix_(keep, keep)]
        h_sub = h_cur[np.ix_(keep, keep)]
        eps, w_modes = sla.eigh(h_sub, s_sub)
        eps0 = eps[0]
        current = _ground_energy(s_cur, h_cur)

        candidates = [
            sampler.draw(base=basis.elements[i])
            for _ in range(config.refine_candidates)
        ]
        rows = _candidate_rows_against(ctx, basis, keep, candidates)
        piv_floor = basis.pivot_floor()
        best = None
        for idx, row in enumerate(rows):
            if row is None:
                continue
            norm, s_row, h_row, h_dd, gauge = row
            energy = _bordered_ground(eps, w_modes, s_row, h_row, h_dd, eps0,
                                      piv_floor)
            if energy is None:
                continue
            if floor is not None and energy < floor - 1e-7 * max(abs(floor), 1.0):
                continue
            if energy < current - 1e-14 * abs(current) and (best is None or energy < best[0]):
                best = (energy, idx, row)
        if best is None:
            continue
        _, idx, (norm, s_row, h_row, h_dd, gauge) = best
        full_s = np.empty(m)
        full_h = np.empty(m)
        full_s[keep] = s_row
        full_h[keep] = h_row
        full_s[i] = 1.0
        full_h[i] = h_dd
        trial = s_cur.copy()
        trial[i, :] = trial[:, i] = full_s
        if not _pivots_ok(trial, piv_floor):
            continue
        improved = True
        basis.replace(i, candidates[idx], norm, full_s, full_h)
        basis.cancel_gauge = max(basis.cancel_gauge, gauge)
    return improved


def _candidate_rows_against(ctx, basis: _Basis, keep, candidates):
    diag = compute_block(ctx, candidates, candidates)
    others = [basis.elements[j] for j in keep]
    norms = np.array([basis.norms[j] for j in keep])
    row_block = compute_block(ctx, others, candidates)
    out = []
    for idx in range(len(candidates)):
        s_dd = diag.s[idx, idx]
        scale = diag.s_scale[idx, idx]
        if not np.isfinite(s_dd) or s_dd <= CANCEL_GUARD * scale:
            out.append(None)
            continue
        norm = 1.0 / sqrt(s_dd)
        s_row = row_block.s[:, idx] * norm * norms
        h_row = row_block.h[:, idx] * norm * norms
        gauge = max(scale * norm * norm,
                    float(np.max(row_block.s_scale[:, idx] * norm * norms)))
        out.append((norm, s_row, h_row, diag.h[idx, idx] * norm * norm, gauge))
    return out


def antisymmetrized_matrix_elements(bra: GaussianBasisElement,
                                    ket: GaussianBasisElement,
                                    system: SystemSpec):
    """(overlap, kinetic, potential) of <bra| O sum_P eps^P P |ket>."""
    ctx = SectorContext(system, bra.family)
    if bra.family != ket.family:
        raise ValueError("bra and ket must carry the same prefactor family")
    block = compute_block(ctx, [bra], [ket])
    return float(block.s[0, 0]), float(block.t[0, 0]), float(block.v[0, 0])
